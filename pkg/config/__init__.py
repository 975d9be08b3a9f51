# disco-isac: Configuration Package
