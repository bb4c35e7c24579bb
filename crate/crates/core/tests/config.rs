use outflow_core::cli_io::{parse_config, RunSpec};
use outflow_core::solver::InitialFamily;
use outflow_core::Error;
use proptest::prelude::*;

fn syntax_line(text: &str) -> usize {
    match parse_config(text) {
        Err(Error::ConfigSyntax { line, .. }) => line,
        other => panic!("expected a syntax error, got {other:?}"),
    }
}

fn value_key(text: &str) -> String {
    match parse_config(text) {
        Err(Error::ConfigValue { key, .. }) => key,
        other => panic!("expected a value error, got {other:?}"),
    }
}

#[test]
fn empty_document_gives_defaults() {
    let spec = parse_config("# nothing\n\n").unwrap();
    assert_eq!(spec, RunSpec::default());
    assert_eq!(spec.params.gamma, 1.4);
    assert_eq!(spec.solver.m, 40.0);
    assert_eq!(spec.seed, 42);
}

#[test]
fn full_document_is_applied() {
    let text = "\
params.n = 3
params.gamma = 1.2   # trailing comment
params.u_b = -0.1
solver.m = 30
solver.nodes = 256
stationary.r_max = 60
initial.family = compact-bump
initial.center = 5
initial.width = 1.5
initial.amp_rho = 0.2
diagnostics.eta_norms = false
sweep.m_values = 20, 30 ,60
output.dir = \"runs/a\"
run.seed = 7
";
    let spec = parse_config(text).unwrap();
    assert_eq!(spec.params.n, 3);
    assert_eq!(spec.params.gamma, 1.2);
    assert_eq!(spec.params.u_b, -0.1);
    assert_eq!(spec.solver.nodes, 256);
    assert_eq!(spec.stationary.r_max, 60.0);
    assert!(matches!(spec.initial, InitialFamily::CompactBump { center, width, amp_rho, amp_u }
        if center == 5.0 && width == 1.5 && amp_rho == 0.2 && amp_u == 0.0));
    assert!(!spec.diagnostics.eta_norms && spec.diagnostics.ledger);
    assert_eq!(spec.sweep.m_values, vec![20.0, 30.0, 60.0]);
    assert_eq!(spec.output_dir, std::path::PathBuf::from("runs/a"));
    assert_eq!(spec.seed, 7);
}

#[test]
fn syntax_errors_carry_line_numbers() {
    assert_eq!(syntax_line("params.gamma = 1.2\nparams.mu 2\n"), 2);
    assert_eq!(syntax_line("\n\nparams.color = 1\n"), 3);
    assert_eq!(syntax_line("gamma = 1.2\n"), 1);
    assert_eq!(syntax_line("params.gamma =\n"), 1);
    assert_eq!(syntax_line("params.gamma = 1.2\nparams.gamma = 1.3\n"), 2);
    assert_eq!(syntax_line("solver.nodes = 12.5\n"), 1);
    assert_eq!(syntax_line("diagnostics.ledger = yes\n"), 1);
    assert_eq!(syntax_line("sweep.m_values = 20,,40\n"), 1);
}

#[test]
fn constraint_errors_carry_key_paths() {
    assert_eq!(value_key("params.gamma = 2.5\n"), "params.gamma");
    assert_eq!(value_key("params.gamma = 0.9\n"), "params.gamma");
    assert_eq!(value_key("params.u_b = 0.05\n"), "params.u_b");
    assert_eq!(value_key("solver.cfl = 1.5\n"), "solver.cfl");
    assert_eq!(value_key("stationary.r_max = 30\n"), "stationary.r_max");
    assert_eq!(value_key("initial.family = wave\n"), "initial.family");
    assert_eq!(value_key("initial.family = stationary\ninitial.width = 2\n"), "initial.family");
    assert_eq!(value_key("verify.branch_samples = 0\n"), "verify.branch_samples");
    match parse_config("params.gamma = 2.5\n") {
        Err(e @ Error::ConfigValue { .. }) => assert!(e.to_string().contains("stability")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn zero_boundary_velocity_is_allowed() {
    let spec = parse_config("params.u_b = 0\n").unwrap();
    assert_eq!(spec.params.u_b, 0.0);
}

proptest! {
    #[test]
    fn admissible_gamma_and_velocity_parse(gamma in 1.0..=2.0f64, u_b in -0.2..=0.0f64) {
        let spec = parse_config(&format!("params.gamma = {gamma:?}\nparams.u_b = {u_b:?}\n")).unwrap();
        prop_assert_eq!(spec.params.gamma.to_bits(), gamma.to_bits());
        prop_assert_eq!(spec.params.u_b.to_bits(), u_b.to_bits());
    }

    #[test]
    fn inflow_is_always_rejected(u_b in 1e-6..1.0f64) {
        let rejected = matches!(parse_config(&format!("params.u_b = {u_b}\n")), Err(Error::ConfigValue { ref key, .. }) if key == "params.u_b");
        prop_assert!(rejected);
    }

    #[test]
    fn unknown_keys_are_syntax_errors(section in "x[a-z]{0,7}", key in "[a-z_]{1,10}", pad in 0usize..4) {
        let text = format!("{}{section}.{key} = 1\n", "\n".repeat(pad));
        let line = match parse_config(&text) {
            Err(Error::ConfigSyntax { line, .. }) => line,
            other => return Err(TestCaseError::fail(format!("{other:?}"))),
        };
        prop_assert_eq!(line, pad + 1);
    }
}
