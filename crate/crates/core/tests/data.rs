use fpl_core::data::{
    encode_idx_images, encode_idx_labels, encode_pgm, idx_dataset, load_idx, load_pgm, parity_dataset,
    parity_exact_ft, parse_idx_images, parse_pgm, GrayImage, IdxImages, ParitySpec,
};
use fpl_core::spectral::nonuniform_ft;
use proptest::prelude::*;

fn images(count: usize) -> IdxImages {
    IdxImages { count, rows: 2, cols: 3, pixels: (0..count * 6).map(|i| (i * 37 % 256) as u8).collect() }
}

#[test]
fn idx_files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (ip, lp) = (dir.path().join("img"), dir.path().join("lab"));
    let labels: Vec<u8> = (0..8).map(|i| (i % 10) as u8).collect();
    std::fs::write(&ip, encode_idx_images(&images(8))).unwrap();
    std::fs::write(&lp, encode_idx_labels(&labels)).unwrap();
    let all = load_idx::<f64>(&ip, &lp, None, 0).unwrap();
    assert_eq!((all.len(), all.input_dim(), all.label_dim()), (8, 6, 10));
    let classes: Vec<usize> = labels.iter().map(|&c| c as usize).collect();
    assert_eq!(all.classes.as_ref(), Some(&classes));
    let sub = load_idx::<f64>(&ip, &lp, Some(3), 9).unwrap();
    assert_eq!(sub.len(), 3);
    assert_eq!(sub.digest(), load_idx::<f64>(&ip, &lp, Some(3), 9).unwrap().digest());
    assert!(all.provenance.starts_with("idx:"));
}

#[test]
fn idx_rejects_bad_input() {
    let mut bytes = encode_idx_images(&images(2));
    bytes[3] = 0x01;
    assert!(parse_idx_images(&bytes).is_err());
    let bytes = encode_idx_images(&images(2));
    assert!(parse_idx_images(&bytes[..bytes.len() - 1]).is_err());
    assert!(idx_dataset::<f64>(&images(2), &[1, 2, 3], None, 0, "t".into()).is_err());
}

#[test]
fn bundled_mnist_header() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist/images-idx3-ubyte");
    let bytes = std::fs::read(path).unwrap();
    assert_eq!(&bytes[..8], &[0, 0, 8, 3, 0, 0, 0x27, 0x10]);
}

#[test]
fn pgm_round_trips_and_splits_odd_columns() {
    let img = GrayImage { width: 4, height: 4, maxval: 255, pixels: (0..16).map(|i| (i % 4 * 60) as u16).collect() };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ramp.pgm");
    std::fs::write(&path, encode_pgm(&img)).unwrap();
    assert_eq!(parse_pgm(&encode_pgm(&img)).unwrap(), img);
    let ds = load_pgm::<f64>(&path).unwrap();
    let cols: std::collections::BTreeSet<usize> = ds.train_indices().iter().map(|i| i % 4).collect();
    assert_eq!(cols.into_iter().collect::<Vec<_>>(), vec![1, 3]);
    let peak = ds.all.labels.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!((peak - 1.0).abs() < 1e-15);
}

#[test]
fn ascii_pgm_with_comments() {
    let img = parse_pgm(b"P2\n# c\n2 1\n# d\n10\n0 10\n").unwrap();
    assert_eq!((img.width, img.height, img.maxval, img.pixels.clone()), (2, 1, 10, vec![0, 10]));
}

proptest! {
    #[test]
    fn parity_transform_matches_the_full_cube(d in 1usize..7, axis in 0usize..6, k in -1.0f64..1.0) {
        let axis = axis % d;
        let cube = parity_dataset::<f64>(&ParitySpec::full(d)).unwrap();
        let mut u = vec![0.0; d];
        u[axis] = 1.0;
        let got = nonuniform_ft(&cube.inputs, cube.labels.as_slice(), &u, &[k]).unwrap()[0];
        let mut kv = vec![0.0; d];
        kv[axis] = k;
        prop_assert!((got - parity_exact_ft(&kv)).norm() < 1e-12);
    }

    #[test]
    fn parity_subsets_are_reproducible(seed in 0u64..1000, s in 1usize..64) {
        let a = parity_dataset::<f64>(&ParitySpec::sampled(6, s, seed)).unwrap();
        let b = parity_dataset::<f64>(&ParitySpec::sampled(6, s, seed)).unwrap();
        prop_assert_eq!(a.digest(), b.digest());
        prop_assert_eq!(a.len(), s);
    }
}

#[test]
fn full_cube_labels_are_balanced() {
    for d in 1..8 {
        let cube = parity_dataset::<f64>(&ParitySpec::full(d)).unwrap();
        assert_eq!(cube.labels.as_slice().iter().sum::<f64>(), 0.0);
    }
}
