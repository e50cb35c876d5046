//! Placeholder.

/// Temporary entry point.
pub fn main_entry() -> i32 {
    0
}
