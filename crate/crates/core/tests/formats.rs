use nvscope::cli::formats::*;
use nvscope::encoder::{encode_spectra, ProjectionGrid, SignalArray, SliceCombine};
use nvscope::phantom::{generate_toroid, DensityGrid, GridSpec};
use nvscope::physics::{NvGeometry, GAUSS_PER_NM};
use nvscope::{Error, Vec3};
use proptest::prelude::*;

fn sample_signal() -> (Vec<nvscope::encoder::SpinNoiseSpectrum>, SignalArray) {
    let m = generate_toroid(40, 0.5, 0.2, 3).unwrap();
    let nv = NvGeometry::new(Vec3::new(0.0, 0.0, -5.0), NvGeometry::axis_111()).unwrap();
    let grid = ProjectionGrid::new(3, 4).unwrap();
    let spectra = encode_spectra(&m, &grid, 3.0 * GAUSS_PER_NM, 1280.0, &nv, SliceCombine::Quadrature).unwrap();
    let sig = SignalArray::from_spectra(&spectra, &grid).unwrap();
    (spectra, sig)
}

proptest! {
    #[test]
    fn grid_round_trip(
        n in 2usize..6,
        voxel in 0.01f64..2.0,
        ox in -5.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let spec = GridSpec::new(n, voxel, Vec3::new(ox, -ox, 0.5 * ox)).unwrap();
        let values: Vec<f64> = (0..spec.len()).map(|i| ((seed ^ i as u64) % 1000) as f64 * 0.37 - 100.0).collect();
        let grid = DensityGrid::from_values(spec, values).unwrap();
        let back = decode_grid(&encode_grid(&grid).unwrap()).unwrap();
        prop_assert_eq!(back.spec, grid.spec);
        prop_assert_eq!(back.values, grid.values);
    }

    #[test]
    fn truncated_grid_is_format_error(cut in 1usize..100) {
        let grid = DensityGrid::from_values(GridSpec::new(3, 0.1, Vec3::zeros()).unwrap(), vec![1.0; 27]).unwrap();
        let bytes = encode_grid(&grid).unwrap();
        let cut = cut.min(bytes.len());
        prop_assert!(matches!(decode_grid(&bytes[..bytes.len() - cut]), Err(Error::Format(_))));
    }
}

#[test]
fn grid_rejects_bad_magic_and_trailing_bytes() {
    let grid = DensityGrid::from_values(GridSpec::new(2, 0.1, Vec3::zeros()).unwrap(), vec![0.5; 8]).unwrap();
    let mut bytes = encode_grid(&grid).unwrap();
    bytes.push(0);
    assert!(matches!(decode_grid(&bytes), Err(Error::Format(_))));
    bytes.pop();
    bytes[0] = b'X';
    assert!(matches!(decode_grid(&bytes), Err(Error::Format(_))));
}

#[test]
fn signal_round_trip_is_exact() {
    let (_, sig) = sample_signal();
    let back = decode_signal(&encode_signal(&sig).unwrap()).unwrap();
    assert_eq!(back.r_values, sig.r_values);
    assert_eq!(back.thetas, sig.thetas);
    assert_eq!(back.phis, sig.phis);
    assert_eq!(back.values, sig.values);
    assert_eq!(back.delta_f, sig.delta_f);
    assert_eq!(back.gradient, sig.gradient);
}

#[test]
fn signal_rejects_truncation_and_inconsistent_dr() {
    let (_, sig) = sample_signal();
    let bytes = encode_signal(&sig).unwrap();
    assert!(matches!(decode_signal(&bytes[..bytes.len() - 8]), Err(Error::Format(_))));
    assert!(matches!(decode_signal(b"NVG1"), Err(Error::Format(_))));
    let mut bad = bytes.clone();
    // dr sits after magic, three u32 dims and three f64 fields.
    let off = 4 + 12 + 24;
    bad[off..off + 8].copy_from_slice(&(sig.dr() * 1.5).to_le_bytes());
    assert!(matches!(decode_signal(&bad), Err(Error::Format(_))));
}

#[test]
fn spectra_csv_round_trip() {
    let (spectra, _) = sample_signal();
    let mut buf = Vec::new();
    write_spectra_csv(&mut buf, &spectra).unwrap();
    let back = read_spectra_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), spectra.len());
    for (a, b) in back.iter().zip(&spectra) {
        assert_eq!(a.brms, b.brms);
        assert_eq!(a.freq_offsets, b.freq_offsets);
        assert!((a.delta_f - b.delta_f).abs() < 1e-9 * b.delta_f);
        assert!((a.gradient.magnitude - b.gradient.magnitude).abs() < 1e-9 * b.gradient.magnitude);
        assert!((a.gradient.theta - b.gradient.theta).abs() < 1e-12);
        assert!((a.gradient.phi - b.gradient.phi).abs() < 1e-12);
    }
}

#[test]
fn spectra_csv_errors() {
    assert!(matches!(read_spectra_csv("nope\n".as_bytes()), Err(Error::Parse { .. })));
    let bad_row = format!("{SPECTRA_HEADER}\n0,1,2,3\n");
    assert!(matches!(read_spectra_csv(bad_row.as_bytes()), Err(Error::Parse { line: 2, .. })));
    let gap = format!("{SPECTRA_HEADER}\n1,0,0,-1280,-0.1,1e-9\n1,0,0,0,0,1e-9\n");
    assert!(matches!(read_spectra_csv(gap.as_bytes()), Err(Error::Format(_))));
}

#[test]
fn save_and_load_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (spectra, sig) = sample_signal();
    let sp = dir.path().join("s.csv");
    let sg = dir.path().join("s.nvs");
    save_spectra(&sp, &spectra).unwrap();
    save_signal(&sg, &sig).unwrap();
    assert_eq!(load_spectra(&sp).unwrap().len(), spectra.len());
    assert_eq!(load_signal(&sg).unwrap().values, sig.values);
    assert!(matches!(load_grid(&dir.path().join("missing.nvg")), Err(Error::Io(_))));
    assert!(!dir.path().join("s.partial").exists());
}
