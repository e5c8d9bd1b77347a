//! Shock and nozzle application routines (under construction).
