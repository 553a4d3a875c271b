"""Mixed-binary quadratic programs: model, branch-and-bound, enumeration, LP export"""
