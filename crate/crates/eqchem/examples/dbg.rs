use eqchem::eqsolver::{solve_pt, SolverConfig};
use eqchem::thermo::{parse_thermo_db, MixtureModel};
use eqchem::BUNDLED_THERMO_DB;

fn main() {
    let db = parse_thermo_db(BUNDLED_THERMO_DB).unwrap();
    let m = MixtureModel::from_names(&db, &["N2", "O2", "N", "O", "NO"]).unwrap();

    println!("=== cold air 300 K ===");
    let cfg = SolverConfig { verbose: true, ..SolverConfig::default() };
    let (state, report) = solve_pt(&m, 101_350.0, 300.0, &[0.76, 0.23, 0.0, 0.0, 0.0], &cfg).unwrap();
    println!("converged={} iters={} eps={:.3e}", report.converged, report.iterations, report.final_residual);
    println!("X = {:?}", state.mole_fractions());

    println!("=== air 2500 K tol sweep ===");
    for tol in [1e-3, 1e-7, 1e-11] {
        let cfg = SolverConfig { tol, ..SolverConfig::default() };
        let (st, rp) = solve_pt(&m, 10_135.0, 2500.0, &[0.767, 0.233, 0.0, 0.0, 0.0], &cfg).unwrap();
        println!("tol={tol:.0e} conv={} iters={} eps={:.3e} pi={:?} lam={:?}",
                 rp.converged, rp.iterations, rp.final_residual, rp.element_potentials, rp.lambda_history.last());
        println!("   X = {:?}", st.mole_fractions());
    }
}
