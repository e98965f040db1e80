"""Engine services: mesh, physics, adjoints, optimizer and result storage."""
