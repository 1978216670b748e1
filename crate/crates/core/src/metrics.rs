//! Rate accounting for a frame layout.
//!
//! One data frame occupies a Manchester pair, so the data-frame rate is half
//! the content rate. Goodput counts payload bits only; throughput also
//! counts the sequence number and checksum; raw throughput counts every
//! cell before correction.

use frameproto::FrameLayout;

/// Data frames per second for a display refreshing at `display_rate` with
/// each Manchester frame held for `hold` refreshes.
pub fn frame_rate(display_rate: f64, hold: usize) -> f64 {
    display_rate / (2 * hold.max(1)) as f64
}

/// Payload bits per second: `D · 0.5·F_d · (1 − FER)`.
///
/// # Panics
/// If `fer` is outside `[0, 1]`.
pub fn compute_goodput(layout: &FrameLayout, display_rate: f64, fer: f64) -> f64 {
    goodput_at(layout, frame_rate(display_rate, 1), fer)
}

/// Goodput at an explicit data-frame rate.
pub fn goodput_at(layout: &FrameLayout, frame_rate: f64, fer: f64) -> f64 {
    assert!((0.0..=1.0).contains(&fer), "FER {fer} outside [0, 1]");
    layout.data_bits() as f64 * frame_rate * (1.0 - fer)
}

/// Bits recovered after correction: payload, sequence number and checksum.
pub fn throughput_at(layout: &FrameLayout, frame_rate: f64, fer: f64) -> f64 {
    assert!((0.0..=1.0).contains(&fer), "FER {fer} outside [0, 1]");
    let bits = layout.cells() - layout.parity_bits() - layout.pad_bits();
    bits as f64 * frame_rate * (1.0 - fer)
}

/// Correct cell bits per second before any correction.
pub fn raw_throughput_at(layout: &FrameLayout, frame_rate: f64, ber: f64) -> f64 {
    assert!((0.0..=1.0).contains(&ber), "BER {ber} outside [0, 1]");
    layout.cells() as f64 * frame_rate * (1.0 - ber)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_table_values() {
        let half = FrameLayout::new(10, 10, 50).unwrap();
        assert_eq!(half.data_bits(), 40);
        assert!((compute_goodput(&half, 60.0, 0.003) - 1196.4).abs() < 1e-9);
        let rate3 = FrameLayout::new(10, 10, 30).unwrap();
        assert_eq!(rate3.data_bits(), 60);
        assert!((compute_goodput(&rate3, 60.0, 0.04) - 1728.0).abs() < 1e-9);
        assert_eq!(compute_goodput(&half, 60.0, 1.0), 0.0);
    }

    #[test]
    fn rates_are_ordered() {
        let l = FrameLayout::new(4, 4, 0).unwrap();
        let fr = frame_rate(60.0, 2);
        assert_eq!(fr, 15.0);
        assert!(goodput_at(&l, fr, 0.1) <= throughput_at(&l, fr, 0.1));
        assert!(throughput_at(&l, fr, 0.1) <= raw_throughput_at(&l, fr, 0.0));
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn fer_out_of_range_panics() {
        compute_goodput(&FrameLayout::new(4, 4, 0).unwrap(), 60.0, 1.5);
    }
}
