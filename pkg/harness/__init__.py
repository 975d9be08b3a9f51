# disco-isac: Experiment Harness Package
