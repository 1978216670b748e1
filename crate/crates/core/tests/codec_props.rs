use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scc::codec::{classical_decode, embed_pair, psnr, GridGeometry, ModulationPlan};
use scc::frame::Frame;
use scc::frameproto::FrameLayout;
use scc::pipeline::{bits_to_bytes, bytes_to_bits, chunk_payload, encode_payload};

fn random_frame(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Frame::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()])
}

fn plans() -> impl Strategy<Value = ModulationPlan> {
    prop_oneof![
        (1u8..=3).prop_map(|delta| ModulationPlan::Fixed { delta }),
        (1u8..=3, 1u8..=3, 0u8..=255).prop_map(|(low, high, threshold)| ModulationPlan::Mix { low, high, threshold }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clean_pairs_decode_to_their_bits(
        rows in 1usize..8, cols in 1usize..8, extra_w in 0usize..9, extra_h in 0usize..9,
        plan in plans(), seed in any::<u64>(),
    ) {
        let (w, h) = (cols * 4 + extra_w, rows * 4 + extra_h);
        let image = random_frame(w, h, seed);
        let geom = GridGeometry::new(rows, cols, w, h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let bits: Vec<u8> = (0..rows * cols).map(|_| rng.random_range(0..2)).collect();
        let (plus, minus) = embed_pair(&image, &bits, &geom, &plan).unwrap();
        prop_assert_eq!(classical_decode(&plus, &minus, &geom).unwrap(), bits);
    }

    #[test]
    fn blue_only_modulation_stays_above_the_delta_three_floor(plan in plans(), seed in any::<u64>()) {
        let image = random_frame(40, 30, seed);
        let geom = GridGeometry::new(3, 4, 40, 30).unwrap();
        let bits: Vec<u8> = (0..12).map(|i| (seed >> i) as u8 & 1).collect();
        let (plus, minus) = embed_pair(&image, &bits, &geom, &plan).unwrap();
        let floor = 10.0 * (255.0f64 * 255.0 / 3.0).log10();
        prop_assert!(psnr(&image, &plus).unwrap() >= floor - 1e-9);
        prop_assert!(psnr(&image, &minus).unwrap() >= floor - 1e-9);
        for (a, b) in image.data().chunks(3).zip(plus.data().chunks(3)) {
            prop_assert_eq!(&a[..2], &b[..2]);
        }
    }

    #[test]
    fn bytes_round_trip_through_bits(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let bits = bytes_to_bits(&bytes);
        prop_assert_eq!(bits.len(), bytes.len() * 8);
        prop_assert_eq!(bits_to_bytes(&bits), bytes);
    }

    #[test]
    fn payload_chunks_cover_the_payload(len in 1usize..400, parity in prop::sample::select(vec![0usize, 20, 50])) {
        let layout = FrameLayout::new(10, 10, parity).unwrap();
        let bits: Vec<u8> = (0..len).map(|i| (i % 3 == 1) as u8).collect();
        let chunks = chunk_payload(&bits, &layout);
        prop_assert_eq!(chunks.len(), len.div_ceil(layout.data_bits()));
        prop_assert!(chunks.iter().all(|c| c.len() == layout.data_bits()));
        let joined: Vec<u8> = chunks.concat();
        prop_assert_eq!(&joined[..len], &bits[..]);
        prop_assert!(joined[len..].iter().all(|&b| b == 0));
    }
}

#[test]
fn encoded_pairs_decode_and_parse_back_to_the_payload() {
    let layout = FrameLayout::new(10, 10, 50).unwrap();
    let content = vec![random_frame(320, 180, 1), random_frame(320, 180, 2)];
    let bits: Vec<u8> = (0..layout.data_bits() * 40).map(|i| ((i * 7) % 5 < 2) as u8).collect();
    let pairs = encode_payload(&content, &bits, &layout, &ModulationPlan::default()).unwrap();
    assert_eq!(pairs.len(), 40);
    let geom = GridGeometry::new(10, 10, 320, 180).unwrap();
    let mut recovered = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        assert_eq!(p.seq as usize, i % 32);
        assert_eq!(p.content_index, i % 2);
        let decoded = classical_decode(&p.plus, &p.minus, &geom).unwrap();
        let parsed = scc::frameproto::parse_frame(&decoded, &layout).unwrap().unwrap();
        assert_eq!(parsed.seq, p.seq);
        recovered.extend(parsed.payload);
    }
    assert_eq!(recovered, bits);
}
