# makes `storage` a package
