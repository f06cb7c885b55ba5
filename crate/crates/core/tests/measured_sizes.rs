use dtahe::costmodel::{measured_vs_model, WireModel};
use dtahe::ecelgamal::EcParams;
use dtahe::lattice::setup;
use dtahe::protocol::{Deployment, ProtocolConfig, Variant};
use dtahe::scheme::{EcScheme, LatticeScheme, SchemeKind};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn lattice_components_match_model_up_to_framing() {
    let dim = 200;
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let scheme = LatticeScheme::new(setup(128, 64, 54, 65537, dim, &mut rng).unwrap());
    let config = ProtocolConfig::new(5, 4, dim, SchemeKind::Lattice, Variant::Basic);
    let mut d = Deployment::new(config, scheme, 3).unwrap();
    d.run().unwrap();
    let report = measured_vs_model(d.transcript(), &WireModel { scheme: SchemeKind::Lattice, degree: 64, dim: dim as u64 });
    assert_eq!(report.len(), 3);
    for row in &report {
        assert!(row.items > 0, "{row:?}");
        assert!(row.deviation.unsigned_abs() < 64, "{row:?}");
        assert!(row.max_message_framing < 64, "{row:?}");
    }
}

#[test]
fn ec_cipher_payload_is_exact() {
    let dim = 20;
    let scheme = EcScheme::new(EcParams::new(dim, 65537, 1 << 20, 1 << 10).unwrap());
    let config = ProtocolConfig::new(5, 4, dim, SchemeKind::EcElgamal, Variant::Secure);
    let mut d = Deployment::new(config, scheme, 3).unwrap();
    d.run().unwrap();
    let report = measured_vs_model(d.transcript(), &WireModel { scheme: SchemeKind::EcElgamal, degree: 0, dim: dim as u64 });
    let cipher = report.iter().find(|r| r.component == "c_u").unwrap();
    assert_eq!(cipher.items, 5);
    assert_eq!(cipher.measured, 66 * dim as u64);
    assert_eq!(cipher.deviation, 0);
    for row in &report {
        assert!(row.deviation.unsigned_abs() < 64, "{row:?}");
    }
}
