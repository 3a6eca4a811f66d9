use l1gn::linalg::CscMatrix;
use l1gn::subsolver::cones::{project_psd, project_soc, smat, svec, svec_len};
use l1gn::subsolver::dump::{read_program, write_program};
use l1gn::subsolver::{admm_solve, AdmmSettings, AdmmSolver, ConicProgram, RowKind};
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn upper(d: &DMatrix<f64>) -> CscMatrix<f64> {
    let n = d.nrows();
    let mut t = Vec::new();
    for j in 0..n {
        for i in 0..=j {
            if d[(i, j)] != 0.0 {
                t.push((i, j, d[(i, j)]));
            }
        }
    }
    CscMatrix::from_triplets(n, n, &t)
}

fn dense_to_csc(d: &DMatrix<f64>) -> CscMatrix<f64> {
    let rows: Vec<Vec<f64>> = (0..d.nrows()).map(|i| (0..d.ncols()).map(|j| d[(i, j)]).collect()).collect();
    CscMatrix::from_dense(&rows)
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn tight() -> AdmmSettings {
    AdmmSettings { eps_abs: 1e-10, eps_rel: 1e-10, max_iter: 200_000, ..AdmmSettings::default() }
}

#[test]
fn equality_qp_matches_dense_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..10 {
        let n = 6 + trial % 4;
        let m = 3;
        let mm = random_matrix(&mut rng, n, n);
        let p = mm.transpose() * &mm + DMatrix::identity(n, n);
        let q = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let a = random_matrix(&mut rng, m, n);
        let b = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));

        // Oracle: [P Aᵀ; A 0][x; y] = [−q; b]
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&p);
        k.view_mut((0, n), (n, m)).copy_from(&a.transpose());
        k.view_mut((n, 0), (m, n)).copy_from(&a);
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(-&q));
        rhs.rows_mut(n, m).copy_from(&b);
        let sol = k.lu().solve(&rhs).unwrap();

        let prog = ConicProgram::new(
            upper(&p),
            q.iter().copied().collect(),
            0.0,
            dense_to_csc(&a),
            vec![RowKind::Zero { rhs: b.iter().copied().collect() }],
        )
        .unwrap();
        let out = admm_solve(&prog, None, &tight()).unwrap();
        for j in 0..n {
            assert!((out.x[j] - sol[j]).abs() < 1e-6, "trial {trial} x[{j}]: {} vs {}", out.x[j], sol[j]);
        }
        for i in 0..m {
            assert!((out.y[i] - sol[n + i]).abs() < 1e-6 * (1.0 + sol[n + i].abs()));
        }
    }
}

#[test]
fn unconstrained_qp_matches_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 8;
    let mm = random_matrix(&mut rng, n, n);
    let p = mm.transpose() * &mm + DMatrix::identity(n, n) * 0.5;
    let q = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    let x = p.clone().lu().solve(&(-&q)).unwrap();
    let prog = ConicProgram::new(upper(&p), q.iter().copied().collect(), 0.0, CscMatrix::zeros(0, n), vec![]).unwrap();
    let out = admm_solve(&prog, None, &tight()).unwrap();
    for j in 0..n {
        assert!((out.x[j] - x[j]).abs() < 1e-6);
    }
}

#[test]
fn diagonal_box_qp_is_clamped_unconstrained_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 20;
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    let q: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let prog = ConicProgram::new(
        CscMatrix::diagonal(&h),
        q.clone(),
        0.0,
        CscMatrix::identity(n),
        vec![RowKind::Box { lo: vec![-0.5; n], hi: vec![0.7; n] }],
    )
    .unwrap();
    let out = admm_solve(&prog, None, &tight()).unwrap();
    for j in 0..n {
        let expect = (-q[j] / h[j]).clamp(-0.5, 0.7);
        assert!((out.x[j] - expect).abs() < 1e-6);
    }
}

#[test]
fn single_variable_box_example() {
    // min x² over [1, 2] → 1
    let prog = ConicProgram::new(
        CscMatrix::diagonal(&[2.0f64]),
        vec![0.0],
        0.0,
        CscMatrix::identity(1),
        vec![RowKind::Box { lo: vec![1.0], hi: vec![2.0] }],
    )
    .unwrap();
    let out = admm_solve(&prog, None, &tight()).unwrap();
    assert!((out.x[0] - 1.0).abs() < 1e-7);
}

fn distance_program(a: &[f64], kind: RowKind<f64>) -> ConicProgram<f64> {
    let n = a.len();
    ConicProgram::new(CscMatrix::identity(n), a.iter().map(|v| -v).collect(), 0.0, CscMatrix::identity(n), vec![kind])
        .unwrap()
}

#[test]
fn soc_distance_problem_matches_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let a: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let prog = distance_program(&a, RowKind::SecondOrder { offset: vec![0.0; 4] });
        let out = admm_solve(&prog, None, &tight()).unwrap();
        let expect = project_soc(&a);
        for j in 0..4 {
            assert!((out.x[j] - expect[j]).abs() < 1e-6, "{:?} vs {:?}", out.x, expect);
        }
    }
}

#[test]
fn psd_distance_problem_matches_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = 4;
    for _ in 0..10 {
        let g = random_matrix(&mut rng, m, m);
        let s = (&g + g.transpose()) * 0.5;
        let flat: Vec<f64> = (0..m * m).map(|k| s[(k / m, k % m)]).collect();
        let a = svec(&flat, m);
        let prog = distance_program(&a, RowKind::Psd { side: m, offset: vec![0.0; svec_len(m)] });
        let out = admm_solve(&prog, None, &tight()).unwrap();
        let expect = svec(&project_psd(&flat, m).unwrap(), m);
        for j in 0..a.len() {
            assert!((out.x[j] - expect[j]).abs() < 1e-6);
        }
        let back = smat(&out.x, m);
        assert!(l1gn::subsolver::cones::lambda_min(&back, m).unwrap() > -1e-6);
    }
}

#[test]
fn l1_distance_problem_is_soft_threshold() {
    let a = vec![3.0, -0.5, 0.2, -4.0];
    let w = vec![1.0, 1.0, 0.1, 2.0];
    let prog = distance_program(&a, RowKind::L1 { weight: w.clone(), offset: vec![0.0; 4] });
    let out = admm_solve(&prog, None, &tight()).unwrap();
    let expect = l1gn::subsolver::cones::prox_l1(&a, &w);
    for j in 0..4 {
        assert!((out.x[j] - expect[j]).abs() < 1e-7);
    }
}

fn mixed_program(seed: u64) -> ConicProgram<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 10;
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
    let q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut rows = Vec::new();
    let eq = random_matrix(&mut rng, 2, n);
    let soc = random_matrix(&mut rng, 3, n);
    let pen = random_matrix(&mut rng, 4, n);
    for d in [&eq, &soc, &pen] {
        for i in 0..d.nrows() {
            rows.push((0..n).map(|j| d[(i, j)]).collect::<Vec<f64>>());
        }
    }
    for j in 0..n {
        let mut r = vec![0.0; n];
        r[j] = 1.0;
        rows.push(r);
    }
    let a = CscMatrix::from_dense(&rows);
    ConicProgram::new(
        CscMatrix::diagonal(&h),
        q,
        0.5,
        a,
        vec![
            RowKind::Zero { rhs: vec![0.1, -0.2] },
            RowKind::SecondOrder { offset: vec![2.0, 0.0, 0.0] },
            RowKind::L1 { weight: vec![3.0; 4], offset: vec![0.3, -0.1, 0.0, 0.2] },
            RowKind::Box { lo: vec![-2.0; n], hi: vec![2.0; n] },
        ],
    )
    .unwrap()
}

#[test]
fn warm_start_from_solution_recertifies_quickly() {
    let prog = mixed_program(1);
    let set = AdmmSettings::default();
    let first = admm_solve(&prog, None, &set).unwrap();
    let second = admm_solve(&prog, Some(&first.state), &set).unwrap();
    assert!(second.iters <= 25, "warm re-solve took {} iterations", second.iters);
    assert!(second.iters <= first.iters);
    for (a, b) in first.x.iter().zip(&second.x) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!(prog.objective(&second.x) <= prog.objective(&first.state.x) + 1e-8);
}

#[test]
fn solutions_are_deterministic() {
    let prog = mixed_program(2);
    let a = admm_solve(&prog, None, &AdmmSettings::default()).unwrap();
    let b = admm_solve(&prog, None, &AdmmSettings::default()).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.iters, b.iters);
}

#[test]
fn mismatched_warm_start_is_ignored_and_counted() {
    let prog = mixed_program(3);
    let other = admm_solve(
        &distance_program(&[1.0, 2.0], RowKind::Box { lo: vec![0.0; 2], hi: vec![1.0; 2] }),
        None,
        &AdmmSettings::default(),
    )
    .unwrap();
    let mut solver = AdmmSolver::new(AdmmSettings::default());
    let out = solver.solve(&prog, Some(&other.state)).unwrap();
    assert_eq!(solver.stats.rejected_warm_starts, 1);
    assert!(prog.violation(&out.x) < 1e-5);
}

#[test]
fn symbolic_factorization_is_reused_for_same_pattern() {
    let mut solver = AdmmSolver::new(AdmmSettings::default());
    let p1 = mixed_program(4);
    let mut p2 = p1.clone();
    p2.q.iter_mut().for_each(|v| *v *= -1.0);
    p2.a.nzval.iter_mut().for_each(|v| *v *= 1.1);
    solver.solve(&p1, None).unwrap();
    solver.solve(&p2, None).unwrap();
    assert_eq!(solver.stats.symbolic_analyses, 1);
}

#[test]
fn minimizer_satisfies_first_order_test_along_feasible_directions() {
    // Feasible set: box only, so random box points are feasible directions.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 6;
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let q: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let j = random_matrix(&mut rng, 3, n);
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|c| if c == i { 1.0 } else { 0.0 }).collect()).collect();
    for i in 0..3 {
        rows.push((0..n).map(|c| j[(i, c)]).collect());
    }
    let prog = ConicProgram::new(
        CscMatrix::diagonal(&h),
        q,
        0.0,
        CscMatrix::from_dense(&rows),
        vec![
            RowKind::Box { lo: vec![-1.0; n], hi: vec![1.0; n] },
            RowKind::L1 { weight: vec![2.0; 3], offset: vec![0.5, -0.5, 0.1] },
        ],
    )
    .unwrap();
    let set = AdmmSettings::default();
    let out = admm_solve(&prog, None, &set).unwrap();
    let f0 = prog.objective(&out.x);
    let tol = 10.0 * (set.eps_abs + set.eps_rel * 10.0);
    for _ in 0..100 {
        let target: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = 1e-3;
        let probe: Vec<f64> = out.x.iter().zip(&target).map(|(&x, &y)| x + t * (y - x)).collect();
        let len: f64 = out.x.iter().zip(&target).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt();
        let slope = (prog.objective(&probe) - f0) / (t * len);
        assert!(slope >= -tol, "descent direction found: slope {slope}");
    }
}

#[test]
fn dump_round_trips() {
    let prog = mixed_program(5);
    let text = write_program(&prog);
    let back = read_program(&text).unwrap();
    assert_eq!(back, prog);
    assert!(read_program("l1gn-conic 2\n").is_err());
}

#[test]
fn single_precision_solve() {
    let prog = ConicProgram::<f32>::new(
        CscMatrix::diagonal(&[2.0f32, 2.0]),
        vec![-2.0, 4.0],
        0.0,
        CscMatrix::identity(2),
        vec![RowKind::Box { lo: vec![0.0, 0.0], hi: vec![0.5, 1.0] }],
    )
    .unwrap();
    let set = AdmmSettings { eps_abs: 1e-5, eps_rel: 1e-5, ..AdmmSettings::default() };
    let out = admm_solve(&prog, None, &set).unwrap();
    assert!((out.x[0] - 0.5).abs() < 1e-4);
    assert!(out.x[1].abs() < 1e-4);
}
