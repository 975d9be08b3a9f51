# disco-isac: Waveform Design Package
