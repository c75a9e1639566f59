use einstein_forge::catalog::{catalog_verify_all, entries, VerifyOverrides};

#[test]
fn every_entry_meets_its_expectation() {
    let reports = catalog_verify_all(&VerifyOverrides {
        parallel: true,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(reports.len(), entries().len());
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}: residual {:e}, lambda {:?}", r.name, r.residual, r.lambda_hat))
        .collect();
    assert!(failed.is_empty(), "{failed:#?}");
}
