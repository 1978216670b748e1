//! Stream-level duplicate and false-positive screening.
//!
//! Two frames whose sequence numbers differ by `x` must be at least `x·sep`
//! camera frames apart, with `sep = ⌊2·F_c / F_d⌋`. Sequence numbers wrap at
//! 32; a forward step is accepted only inside a 16-frame window.

use serde::{Deserialize, Serialize};

pub const SEQ_MODULUS: u8 = 32;
pub const SEQ_WINDOW: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DedupDecision {
    Accept { unwrapped_seq: u64 },
    /// Same sequence number as the last accepted frame.
    Duplicate,
    /// Sequence advanced by `x` but fewer than `x·sep` camera frames passed.
    TooSoon { advance: u8, gap: u64 },
    /// Backwards step or jump beyond the unwrap window.
    OutOfWindow { advance: u8 },
    /// `frame_index` did not increase.
    NonMonotonic,
}

impl DedupDecision {
    pub fn is_accept(&self) -> bool {
        matches!(self, DedupDecision::Accept { .. })
    }

    pub fn reason(&self) -> &'static str {
        match self {
            DedupDecision::Accept { .. } => "accept",
            DedupDecision::Duplicate => "duplicate",
            DedupDecision::TooSoon { .. } => "too_soon",
            DedupDecision::OutOfWindow { .. } => "out_of_window",
            DedupDecision::NonMonotonic => "non_monotonic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupState {
    sep: u64,
    last_seq: Option<u8>,
    last_frame_index: Option<u64>,
    unwrapped: u64,
    last_seen_index: Option<u64>,
}

impl DedupState {
    /// `sep` is clamped to at least 1.
    pub fn new(sep: u64) -> DedupState {
        DedupState {
            sep: sep.max(1),
            last_seq: None,
            last_frame_index: None,
            unwrapped: 0,
            last_seen_index: None,
        }
    }

    /// Separation derived from the camera and display rates.
    pub fn from_rates(camera_rate: f64, display_rate: f64) -> DedupState {
        DedupState::new(separation(camera_rate, display_rate))
    }

    pub fn sep(&self) -> u64 {
        self.sep
    }

    pub fn last_seq(&self) -> Option<u8> {
        self.last_seq
    }

    pub fn last_frame_index(&self) -> Option<u64> {
        self.last_frame_index
    }

    pub fn accept(&mut self, seq: u8, frame_index: u64) -> DedupDecision {
        let seq = seq % SEQ_MODULUS;
        if self.last_seen_index.is_some_and(|prev| frame_index <= prev) {
            return DedupDecision::NonMonotonic;
        }
        self.last_seen_index = Some(frame_index);

        let (last_seq, last_index) = match (self.last_seq, self.last_frame_index) {
            (Some(s), Some(i)) => (s, i),
            _ => {
                self.last_seq = Some(seq);
                self.last_frame_index = Some(frame_index);
                self.unwrapped = seq as u64;
                return DedupDecision::Accept {
                    unwrapped_seq: self.unwrapped,
                };
            }
        };

        let advance = seq.wrapping_sub(last_seq) % SEQ_MODULUS;
        if advance == 0 {
            return DedupDecision::Duplicate;
        }
        if advance > SEQ_WINDOW {
            return DedupDecision::OutOfWindow { advance };
        }
        let gap = frame_index - last_index;
        if gap < advance as u64 * self.sep {
            return DedupDecision::TooSoon { advance, gap };
        }
        self.last_seq = Some(seq);
        self.last_frame_index = Some(frame_index);
        self.unwrapped += advance as u64;
        DedupDecision::Accept {
            unwrapped_seq: self.unwrapped,
        }
    }
}

/// `⌊2·F_c / F_d⌋`, at least 1.
pub fn separation(camera_rate: f64, display_rate: f64) -> u64 {
    ((2.0 * camera_rate / display_rate).floor() as u64).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sep_for_canonical_rates() {
        assert_eq!(separation(120.0, 60.0), 4);
        assert_eq!(separation(30.0, 60.0), 1);
        assert_eq!(DedupState::from_rates(120.0, 30.0).sep(), 8);
    }

    #[test]
    fn first_frame_is_accepted() {
        let mut st = DedupState::new(4);
        assert!(st.accept(7, 0).is_accept());
    }

    #[test]
    fn duplicate_two_frames_later_is_rejected() {
        let mut st = DedupState::new(4);
        st.accept(5, 10);
        assert_eq!(st.accept(5, 12), DedupDecision::Duplicate);
    }

    #[test]
    fn one_step_at_exact_separation_is_accepted() {
        let mut st = DedupState::new(4);
        st.accept(5, 10);
        assert!(st.accept(6, 14).is_accept());
    }

    #[test]
    fn three_steps_need_twelve_frames() {
        let mut st = DedupState::new(4);
        st.accept(5, 10);
        assert_eq!(
            st.accept(8, 18),
            DedupDecision::TooSoon { advance: 3, gap: 8 }
        );
        assert!(st.accept(8, 22).is_accept());
    }

    #[test]
    fn wraparound_and_window() {
        let mut st = DedupState::new(1);
        st.accept(30, 0);
        assert_eq!(st.accept(1, 3), DedupDecision::Accept { unwrapped_seq: 33 });
        assert_eq!(st.accept(0, 4), DedupDecision::OutOfWindow { advance: 31 });
        assert_eq!(st.accept(2, 4), DedupDecision::NonMonotonic);
    }

    #[test]
    fn rejected_frames_do_not_move_state() {
        let mut st = DedupState::new(4);
        st.accept(1, 0);
        st.accept(9, 2);
        assert_eq!(st.last_seq(), Some(1));
        assert!(st.accept(2, 4).is_accept());
    }
}
