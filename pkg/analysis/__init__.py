# disco-isac: Communication and Sensing Analysis Package
