use aiot_phy::codec::{
    cc_encode_swept, crc_attach, crc_check, CrcSpec, CrcVariant, DecoderInput, NestedCcConfig, PolyOption,
    Termination, ViterbiDecoder, CRC_LENGTHS,
};
use aiot_phy::linecode::{decode_chips, encode, LineCodeKind};
use aiot_phy::{BitBlock, BlockRole};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn crc_then_swept_code_survives_two_bit_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (k, rates) in [(7usize, 2..=4usize), (6, 2..=6)] {
        for opt in [PolyOption::A, PolyOption::B, PolyOption::C] {
            for n in rates.clone() {
                for term in [Termination::ZeroTail, Termination::TailBiting] {
                    let cfg = NestedCcConfig::nested(k, opt, n, term).unwrap();
                    let dec = ViterbiDecoder::new(cfg.clone());
                    for _ in 0..20 {
                        let variant = if rng.random() { CrcVariant::NrBased } else { CrcVariant::NewSearch };
                        let spec = CrcSpec::new(variant);
                        let len = CRC_LENGTHS[rng.random_range(0..3)];
                        let msg = BitBlock::message((0..64).map(|_| rng.random_range(0..2)).collect()).unwrap();
                        let with_crc = crc_attach(&msg, &spec, len).unwrap();
                        let mut coded = cc_encode_swept(&with_crc, &cfg).unwrap().into_bits();
                        let a = rng.random_range(0..coded.len() / 2);
                        let b = rng.random_range(coded.len() / 2..coded.len());
                        coded[a] ^= 1;
                        coded[b] ^= 1;
                        let rx = BitBlock::new(coded, BlockRole::Coded).unwrap();
                        let (out, dist) = dec.decode(DecoderInput::Hard(&rx), true).unwrap();
                        assert_eq!(dist, 2.0, "K={k} {opt:?} 1/{n} {term:?}");
                        let out = BitBlock::new(out.into_bits(), BlockRole::MessageWithCrc).unwrap();
                        assert_eq!(out, with_crc);
                        assert!(crc_check(&out, &spec, len).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn every_line_code_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut kinds = vec![LineCodeKind::Pie, LineCodeKind::Manchester, LineCodeKind::Fm0];
    for m in [2, 4, 8] {
        kinds.push(LineCodeKind::mms(m).unwrap());
        kinds.push(LineCodeKind::enhanced_manchester(m).unwrap());
    }
    for kind in kinds {
        for len in [1, 2, 7, 100] {
            let bits = BitBlock::message((0..len).map(|_| rng.random_range(0..2)).collect()).unwrap();
            let chips = encode(&bits, kind).unwrap();
            assert_eq!(decode_chips(chips.chips(), kind).unwrap().bits(), bits.bits(), "{kind:?}");
            if let Some(per) = kind.chips_per_bit() {
                assert_eq!(chips.len(), per * len);
            }
        }
    }
}
