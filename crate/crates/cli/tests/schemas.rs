//! docs/*.schema.json must match the types. Regenerate with
//! `UPDATE_SCHEMAS=1 cargo test -p harmonic-cli --test schemas`.

use std::path::PathBuf;

use harmonic_cli::commands::schemas::IdentityReport;
use harmonic_cli::RunConfig;
use harmonic_core::acceptance::CriterionOutcome;
use harmonic_core::dynamics::{CrossValidationReport, LimitApproach, Trajectory};
use harmonic_core::oscillatory::SweepSpec;
use harmonic_core::spectral::{ClassificationReport, Limits, SpectralProfile};
use harmonic_core::sweep::BoundSweepReport;
use schemars::schema::RootSchema;
use schemars::schema_for;

fn schemas() -> Vec<(&'static str, RootSchema)> {
    vec![
        ("run_config", schema_for!(RunConfig)),
        ("sweep_spec", schema_for!(SweepSpec)),
        ("classification_report", schema_for!(ClassificationReport)),
        ("trajectory", schema_for!(Trajectory)),
        ("cross_validation_report", schema_for!(CrossValidationReport)),
        ("limits", schema_for!(Limits)),
        ("limit_approach", schema_for!(LimitApproach)),
        ("spectral_profile", schema_for!(SpectralProfile)),
        ("bound_sweep_report", schema_for!(BoundSweepReport)),
        ("identity_report", schema_for!(IdentityReport)),
        ("criterion_outcomes", schema_for!(Vec<CriterionOutcome>)),
    ]
}

#[test]
fn docs_schemas_are_current() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs");
    let update = std::env::var_os("UPDATE_SCHEMAS").is_some();
    let mut stale = Vec::new();
    for (name, schema) in schemas() {
        let path = dir.join(format!("{name}.schema.json"));
        let text = serde_json::to_string_pretty(&schema).unwrap() + "\n";
        if update {
            std::fs::write(&path, &text).unwrap();
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(text.as_str()) {
            stale.push(name);
        }
    }
    assert!(stale.is_empty(), "stale schemas in docs/: {stale:?}");
}
