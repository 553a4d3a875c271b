"""Utils package for scert: errors, configuration, CSV I/O and solve metrics"""
