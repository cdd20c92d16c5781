# Adapters are imported by module from the CLI; nothing is re-exported here.
__all__ = []
