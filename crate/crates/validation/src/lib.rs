//! Holds the acceptance suite in `tests/`; no library code.
