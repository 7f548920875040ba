use std::fs::OpenOptions;
use std::io::{Seek, SeekFrom, Write};

use boltzmann_spectral::cache::{
    peek_header, read_direct, read_fast, write_direct, write_fast, CacheLoad, PayloadKind,
    HEADER_BYTES,
};
use boltzmann_spectral::{
    analytic, gauss_legendre, lebedev, precompute_f, precompute_g, CollisionKernel,
    CollisionOperator, DirectSolver, Error, FastSolver, VelocityGrid,
};

const CAP: u64 = 1 << 33;

fn vss() -> CollisionKernel {
    CollisionKernel::vss(0.25 / std::f64::consts::PI, 0.38, 0.4).unwrap()
}

#[test]
fn fast_weights_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let grid = VelocityGrid::with_default_domain(8, 6.0).unwrap();
    let radial = gauss_legendre(8, 0.0, grid.radius()).unwrap();
    let sphere = lebedev(14).unwrap();
    for kernel in [CollisionKernel::maxwell(), vss()] {
        let w = precompute_f(&grid, &kernel, &radial, &sphere, &lebedev(38).unwrap(), CAP).unwrap();
        let path = dir.path().join("fast.bspw");
        let header = write_fast(&path, &w).unwrap();
        assert_eq!(header.kind, PayloadKind::Fast);
        let len = std::fs::metadata(&path).unwrap().len() as u128;
        assert_eq!(len, HEADER_BYTES as u128 + header.payload_bytes() + 8);

        let CacheLoad::Hit(back) = read_fast(&path, &grid, &kernel, &radial, &sphere).unwrap() else {
            panic!("expected a cache hit");
        };
        let bits = |v: &[num_complex::Complex64]| {
            v.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect::<Vec<_>>()
        };
        assert_eq!(bits(back.loss_diag()), bits(w.loss_diag()));
        assert_eq!(back.f_table().map(bits), w.f_table().map(bits));

        let f = analytic::bkw_f(6.5, &grid).unwrap();
        let fresh = FastSolver::new(w).collide(&f).unwrap();
        let loaded = FastSolver::new(back).collide(&f).unwrap();
        assert_eq!(fresh.as_slice(), loaded.as_slice());
    }
}

#[test]
fn direct_weights_round_trip_and_evaluate_identically() {
    let dir = tempfile::tempdir().unwrap();
    let grid = VelocityGrid::with_default_domain(4, 6.0).unwrap();
    let radial = gauss_legendre(4, 0.0, grid.radius()).unwrap();
    let rule = lebedev(14).unwrap();
    let kernel = vss();
    let g = precompute_g(&grid, &kernel, &radial, &rule, &rule, CAP).unwrap();
    let path = dir.path().join("direct.bspw");
    write_direct(&path, &g, radial.len(), rule.len()).unwrap();
    let CacheLoad::Hit(back) = read_direct(&path, &grid, &kernel, radial.len(), rule.len()).unwrap()
    else {
        panic!("expected a cache hit");
    };
    assert_eq!(back.table(), g.table());
    let f = analytic::bkw_f(6.5, &grid).unwrap();
    let a = DirectSolver::new(g).collide(&f).unwrap();
    let b = DirectSolver::new(back).collide(&f).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
}

#[test]
fn header_mismatch_is_reported_not_reused() {
    let dir = tempfile::tempdir().unwrap();
    let grid = VelocityGrid::with_default_domain(4, 6.0).unwrap();
    let radial = gauss_legendre(4, 0.0, grid.radius()).unwrap();
    let sphere = lebedev(6).unwrap();
    let w = precompute_f(&grid, &CollisionKernel::maxwell(), &radial, &sphere, &sphere, CAP).unwrap();
    let path = dir.path().join("fast.bspw");
    write_fast(&path, &w).unwrap();

    let other_sphere = lebedev(14).unwrap();
    match read_fast(&path, &grid, &CollisionKernel::maxwell(), &radial, &other_sphere).unwrap() {
        CacheLoad::Mismatch { found } => assert_eq!(found.sphere_points, 6),
        CacheLoad::Hit(_) => panic!("stale cache reused"),
    }
    let hard = CollisionKernel::hard_sphere();
    assert!(matches!(
        read_fast(&path, &grid, &hard, &radial, &sphere).unwrap(),
        CacheLoad::Mismatch { .. }
    ));
    // A direct request against a fast file is a mismatch too.
    assert!(matches!(
        read_direct(&path, &grid, &CollisionKernel::maxwell(), 4, 6).unwrap(),
        CacheLoad::Mismatch { .. }
    ));
}

#[test]
fn corrupted_payload_fails_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let grid = VelocityGrid::with_default_domain(4, 6.0).unwrap();
    let radial = gauss_legendre(4, 0.0, grid.radius()).unwrap();
    let sphere = lebedev(6).unwrap();
    let w = precompute_f(&grid, &vss(), &radial, &sphere, &sphere, CAP).unwrap();
    let path = dir.path().join("fast.bspw");
    write_fast(&path, &w).unwrap();
    {
        let mut file = OpenOptions::new().write(true).open(&path).unwrap();
        file.seek(SeekFrom::Start(HEADER_BYTES as u64 + 40)).unwrap();
        file.write_all(&[0xAB]).unwrap();
    }
    assert!(matches!(
        read_fast(&path, &grid, &vss(), &radial, &sphere),
        Err(Error::Checksum { .. })
    ));
}

#[test]
fn truncated_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let grid = VelocityGrid::with_default_domain(4, 6.0).unwrap();
    let radial = gauss_legendre(4, 0.0, grid.radius()).unwrap();
    let sphere = lebedev(6).unwrap();
    let w = precompute_f(&grid, &CollisionKernel::maxwell(), &radial, &sphere, &sphere, CAP).unwrap();
    let path = dir.path().join("fast.bspw");
    write_fast(&path, &w).unwrap();
    let len = std::fs::metadata(&path).unwrap().len();
    OpenOptions::new().write(true).open(&path).unwrap().set_len(len - 3).unwrap();
    assert!(matches!(
        read_fast(&path, &grid, &CollisionKernel::maxwell(), &radial, &sphere),
        Err(Error::Cache(_))
    ));
}

#[test]
fn header_layout_is_little_endian() {
    let dir = tempfile::tempdir().unwrap();
    let grid = VelocityGrid::new(4, 6.0, 7.0).unwrap();
    let radial = gauss_legendre(3, 0.0, grid.radius()).unwrap();
    let sphere = lebedev(6).unwrap();
    let w = precompute_f(&grid, &CollisionKernel::maxwell(), &radial, &sphere, &sphere, CAP).unwrap();
    let path = dir.path().join("fast.bspw");
    write_fast(&path, &w).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"BSPW");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(bytes[8], 2);
    assert_eq!(bytes[9], 1);
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    assert_eq!(f(10), 0.25 / std::f64::consts::PI);
    assert_eq!((f(18), f(26)), (0.0, 0.0));
    let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    assert_eq!((u(34), u(38), u(42)), (4, 3, 6));
    assert_eq!((f(46), f(54)), (7.0, 6.0));
    let h = peek_header(&path).unwrap();
    assert_eq!(h.n, 4);
    // First payload entry is the loss diagonal at k = 0.
    assert_eq!(f(HEADER_BYTES), w.loss_diag()[0].re);
}
