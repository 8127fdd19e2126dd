//! Thread-local scalar-operation counter.
//!
//! Arithmetic kernels bump the counter once per pass with the number of
//! scalar multiplications the pass performs, so the overhead is one
//! thread-local add per `d`-sized loop.

use std::cell::Cell;

thread_local! {
    static SCALAR_MULS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub fn add(n: u64) {
    SCALAR_MULS.with(|c| c.set(c.get().wrapping_add(n)));
}

pub fn reset() {
    SCALAR_MULS.with(|c| c.set(0));
}

pub fn get() -> u64 {
    SCALAR_MULS.with(|c| c.get())
}

/// Runs `f` and returns its result together with the scalar multiplications
/// it performed on this thread.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = get();
    let out = f();
    (out, get().wrapping_sub(before))
}
