# makes `core` a package
