//! Iterative radix-2 FFT for power-of-two lengths.

use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub(crate) struct Radix2Fft {
    len: usize,
    twiddles: Vec<(f64, f64)>,
    bit_reverse: Vec<usize>,
}

impl Radix2Fft {
    pub(crate) fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "FFT length must be a power of two");
        let twiddles = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * core::f64::consts::PI * k as f64 / len as f64;
                (libm::cos(angle), libm::sin(angle))
            })
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Self {
            len,
            twiddles,
            bit_reverse,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// In-place forward transform of `(re, im)` pairs.
    pub(crate) fn process(&self, buf: &mut [(f64, f64)]) {
        assert_eq!(buf.len(), self.len);
        for i in 0..self.len {
            let j = self.bit_reverse[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.len {
            let half = size / 2;
            let stride = self.len / size;
            for start in (0..self.len).step_by(size) {
                for k in 0..half {
                    let (wr, wi) = self.twiddles[k * stride];
                    let (br, bi) = buf[start + k + half];
                    let t = (br * wr - bi * wi, br * wi + bi * wr);
                    let u = buf[start + k];
                    buf[start + k] = (u.0 + t.0, u.1 + t.1);
                    buf[start + k + half] = (u.0 - t.0, u.1 - t.1);
                }
            }
            size *= 2;
        }
    }
}
