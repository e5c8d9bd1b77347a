use eqchem::constants::R_UNIVERSAL;
use eqchem::eqsolver::{lagrangian_value, solve_pt, verify_stationarity, SolverConfig};
use eqchem::thermo::{parse_thermo_db, MixtureModel};
use eqchem::BUNDLED_THERMO_DB;

fn main() {
    let db = parse_thermo_db(BUNDLED_THERMO_DB).unwrap();
    let m = MixtureModel::from_names(&db, &["N2", "O2", "N", "O", "NO"]).unwrap();
    let x0 = [0.767, 0.233, 0.0, 0.0, 0.0];
    let m0 = m.mean_molar_mass(&x0);
    let n0: Vec<f64> = x0.iter().map(|x| x / m0).collect();
    for tol in [1e0, 1e-2, 1e-4, 1e-7, 1e-11] {
        let cfg = SolverConfig { tol, ..SolverConfig::default() };
        let (st, rp) = solve_pt(&m, 10_135.0, 2500.0, &x0, &cfg).unwrap();
        let rt = R_UNIVERSAL * st.temperature;
        let lam: Vec<f64> = rp.element_potentials.iter().map(|p| -p * rt).collect();
        let l = lagrangian_value(&m, st.temperature, st.pressure, &st.ns, &n0, &lam).unwrap();
        let (grad, norm) =
            verify_stationarity(&m, st.temperature, st.pressure, &st.ns, &n0, &lam, 1e-6).unwrap();
        println!("tol={tol:.0e} stop_eps={:.3e} |L|={l:.4e} norm={norm:.4e} grad={grad:?}", rp.final_residual);
    }
}
