# disco-isac: Channel Model Package
