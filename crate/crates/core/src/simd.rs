//! Some dense kernels return with the upper halves of the vector registers still
//! dirty. Later legacy-SSE code, which includes the libm `atan`/`exp`/`ln` calls used
//! throughout the crate, then pays a state-transition penalty on every instruction
//! (measured at 30x for `atan`), and threads spawned afterwards inherit the state.
//! [`clear_upper_state`] runs after each dense linear-algebra call.

#[inline]
pub(crate) fn clear_upper_state() {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx") {
            // SAFETY: the CPU supports AVX, checked above.
            unsafe { zero_upper() }
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn zero_upper() {
    std::arch::x86_64::_mm256_zeroupper();
}
