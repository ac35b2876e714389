use ceit_core::{oracle, rates, Axis, MhzParams};

fn main() {
    // weak-drive convergence of oracle/rate at the EIT point and at the
    // red sideband of |+>
    for omega_p in [0.23, 0.115, 0.0575] {
        let mut m = MhzParams::default();
        m.omega_p_mhz = omega_p;
        let p = m.build().unwrap();
        let r = rates::rates_resolvent(&p, Axis::Z, p.omega_z).unwrap();
        let t_final = (3.0 / r.gamma).min(12000.0);
        let cfg = oracle::OracleConfig {
            n_max: 12,
            t_final,
            sample_dt: t_final / 300.0,
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            ..Default::default()
        };
        let l = oracle::build_liouvillian(&p, &cfg).unwrap();
        let run = oracle::evolve(&l, &oracle::fock_initial_state(cfg.n_max, 2).unwrap(), &cfg).unwrap();
        println!(
            "EIT omega_p={omega_p}: ratio G_oracle/G_rate = {:.4}  m_st ratio = {:.4} (rate m_st {:.4}, oracle {:.4}) res {:.1e}",
            run.gamma_fit / r.gamma,
            run.m_ss / r.m_st.unwrap(),
            r.m_st.unwrap(),
            run.m_ss,
            run.fit_residual,
        );
    }
}
