//! Input language, configuration and report serialization.
