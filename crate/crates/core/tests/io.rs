use afdm::baselines::conventional_afdm;
use afdm::io::{csv, samples_csv, sha256_hex, write_atomic, Manifest, Waveform, MAGIC};
use afdm::run::RunConfig;
use afdm::{AfdmConfig, ModulationMatrices};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn waveform_file_round_trip() {
    let cfg = AfdmConfig::reference(0.2).unwrap();
    let mm = ModulationMatrices::new(&cfg).unwrap();
    let d = conventional_afdm(&cfg, 2);
    let w = Waveform::from_design(&cfg, &mm, &d).unwrap();
    assert_eq!(w.samples.len(), 512);
    let bytes = w.to_bytes();
    assert_eq!(bytes.len(), 24 + 16 * 512);
    assert_eq!(&bytes[..16], &MAGIC);
    assert_eq!(Waveform::from_bytes(&bytes).unwrap(), w);
    let sr = w.symbol_rate();
    let direct = mm.synthesize(&d.effective(&cfg)).unwrap();
    let err = sr.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-10);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/w.afdm");
    write_atomic(&path, &bytes).unwrap();
    assert_eq!(Waveform::read(&path).unwrap(), w);
    assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
}

#[test]
fn malformed_files_are_rejected() {
    let w = Waveform { n: 2, oversampling: 1, samples: vec![Complex64::new(1.0, 2.0); 2] };
    let good = w.to_bytes();
    let mut bad = good.clone();
    bad[0] = b'X';
    assert!(Waveform::from_bytes(&bad).is_err());
    assert!(Waveform::from_bytes(&good[..good.len() - 1]).is_err());
    assert!(Waveform::from_bytes(&good[..10]).is_err());
    let mut zero = good.clone();
    zero[16..20].copy_from_slice(&0u32.to_le_bytes());
    assert!(Waveform::from_bytes(&zero).is_err());
}

#[test]
fn csv_writers() {
    let s = samples_csv(&[Complex64::new(0.5, -1.0)]);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("index,re,im"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row, vec![0.0, 0.5, -1.0]);
    assert_eq!(csv("a,b", [vec!["1".into(), "2".into()]]), "a,b\n1,2\n");
}

#[test]
fn manifest_and_config_serialize() {
    let m = Manifest { command: "design".into(), config_sha256: sha256_hex(b""), seed: 4, version: "0.1.0".into(), files: vec!["x".into()] };
    assert_eq!(m.config_sha256, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    let back: Manifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
    let rc = RunConfig::default();
    assert_eq!(RunConfig::from_toml(&rc.to_toml()).unwrap(), rc);
    assert!(RunConfig::from_toml("bogus = 1").is_err());
}

proptest! {
    #[test]
    fn arbitrary_samples_round_trip(re in prop::collection::vec(-1e6f64..1e6, 1..64), lp in 1u32..5) {
        let samples: Vec<Complex64> = re.iter().cycle().take(re.len() * lp as usize).enumerate()
            .map(|(i, &x)| Complex64::new(x, i as f64)).collect();
        let w = Waveform { n: re.len() as u32, oversampling: lp, samples };
        prop_assert_eq!(Waveform::from_bytes(&w.to_bytes()).unwrap(), w);
    }
}
