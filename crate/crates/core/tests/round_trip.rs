use elf_codec::eraser::canonical_nan;
use elf_codec::{
    compress_block, decompress_block, Algorithm, Block, Encoder, Error, IeeeFloat,
};
use proptest::prelude::*;

fn expected_bits<F: IeeeFloat>(v: F) -> u64 {
    if v.is_nan() {
        canonical_nan::<F>(v.to_raw())
    } else {
        v.to_raw()
    }
}

fn assert_round_trip<F: IeeeFloat>(values: &[F]) {
    for algorithm in Algorithm::ALL {
        let block = compress_block(values, algorithm).unwrap();
        let bytes = block.to_bytes();
        let (parsed, used) = Block::from_bytes(&bytes).unwrap();
        assert_eq!(used, bytes.len());
        let decoded = decompress_block::<F>(&parsed).unwrap();
        assert_eq!(decoded.len(), values.len());
        for (i, (&v, &d)) in values.iter().zip(&decoded).enumerate() {
            assert_eq!(
                d.to_raw(),
                expected_bits(v),
                "{algorithm} value {i}: {v} decoded as {d}"
            );
        }
    }
}

#[test]
fn special_values_double() {
    assert_round_trip(&[
        0.0,
        -0.0,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::from_bits(0x7ff4_0000_0000_0000),
        f64::from_bits(0xfff0_0000_0000_0001),
        f64::NAN,
        5e-324,
        -5e-324,
        1.5e-320,
        f64::MIN_POSITIVE,
        f64::MAX,
        f64::MIN,
        0.1,
        0.001,
        1e-300,
        1e300,
        3.17,
        -3.17,
    ]);
}

#[test]
fn special_values_single() {
    assert_round_trip(&[
        0.0f32,
        -0.0,
        f32::INFINITY,
        f32::NEG_INFINITY,
        f32::from_bits(0x7f80_0001),
        f32::NAN,
        1e-45,
        1e-40,
        f32::MIN_POSITIVE,
        f32::MAX,
        0.1,
        3.17,
        -25.5,
    ]);
}

#[test]
fn signaling_nan_becomes_canonical_quiet_nan() {
    let block = compress_block(&[f64::from_bits(0x7ff4_0000_0000_0000)], Algorithm::Elf).unwrap();
    let back = decompress_block::<f64>(&block).unwrap();
    assert_eq!(back[0].to_bits(), 0x7ff8_0000_0000_0000);
}

#[test]
fn streaming_matches_batch() {
    let values: Vec<f64> = (0..1000).map(|i| (f64::from(i) * 0.37).sin() * 100.0).collect();
    let rounded: Vec<f64> = values.iter().map(|v| (v * 100.0).round() / 100.0).collect();
    for algorithm in Algorithm::ALL {
        let mut enc = Encoder::new(algorithm);
        for &v in &rounded {
            enc.push(v).unwrap();
        }
        let streamed = enc.finish().unwrap();
        assert_eq!(
            streamed.to_bytes(),
            compress_block(&rounded, algorithm).unwrap().to_bytes()
        );
    }
}

#[test]
fn truncated_payload_is_an_error() {
    let values: Vec<f64> = (0..50).map(|i| f64::from(i) * 1.01).collect();
    let bytes = compress_block(&values, Algorithm::ElfPlus).unwrap().to_bytes();
    // shrink the declared payload so the decoder runs out of bits
    let mut cut = bytes[..bytes.len() - 4].to_vec();
    let len = (bytes.len() - 4 - elf_codec::HEADER_LEN) as u32;
    cut[9..13].copy_from_slice(&len.to_le_bytes());
    let (block, _) = Block::from_bytes(&cut).unwrap();
    assert!(matches!(
        decompress_block::<f64>(&block),
        Err(Error::EndOfStream { .. })
    ));
}

fn decimal_double() -> impl Strategy<Value = f64> {
    (1u64..10_000_000_000, -12i32..6, any::<bool>()).prop_map(|(n, scale, neg)| {
        let v: f64 = format!("{n}e{scale}").parse().unwrap();
        if neg {
            -v
        } else {
            v
        }
    })
}

fn decimal_single() -> impl Strategy<Value = f32> {
    (1u32..10_000_000, -8i32..4).prop_map(|(n, scale)| format!("{n}e{scale}").parse().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arbitrary_doubles_round_trip(bits in prop::collection::vec(any::<u64>(), 1..300)) {
        let values: Vec<f64> = bits.into_iter().map(f64::from_bits).collect();
        assert_round_trip(&values);
    }

    #[test]
    fn arbitrary_singles_round_trip(bits in prop::collection::vec(any::<u32>(), 1..300)) {
        let values: Vec<f32> = bits.into_iter().map(f32::from_bits).collect();
        assert_round_trip(&values);
    }

    #[test]
    fn decimal_doubles_round_trip(values in prop::collection::vec(decimal_double(), 1..300)) {
        assert_round_trip(&values);
    }

    #[test]
    fn decimal_singles_round_trip(values in prop::collection::vec(decimal_single(), 1..300)) {
        assert_round_trip(&values);
    }

    #[test]
    fn random_walks_round_trip(start in -1000i64..1000, steps in prop::collection::vec(-50i64..50, 1..500), places in 0u32..5) {
        let scale = 10f64.powi(places as i32);
        let mut level = start;
        let values: Vec<f64> = steps.iter().map(|s| { level += s; level as f64 / scale }).collect();
        assert_round_trip(&values);
    }
}
