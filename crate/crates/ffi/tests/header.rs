use std::path::Path;
use std::process::Command;

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/genus2.h")).unwrap();
    for sym in [
        "genus2_last_error",
        "genus2_integrals",
        "genus2_critical_angles",
        "genus2_nullity",
        "genus2_spectrum_new",
        "genus2_spectrum_free",
        "genus2_spectrum_counts",
        "genus2_spectrum_lambda1",
        "genus2_spectrum_eigenvalues",
        "GENUS2_STATUS_OK = 0",
        "typedef struct Genus2Spectrum Genus2Spectrum",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let src = tempfile::Builder::new().suffix(".c").tempfile().unwrap();
    std::fs::write(
        src.path(),
        "#include \"genus2.h\"\nint main(void) { double v[4]; return genus2_integrals(0.5, 1e-12, v, 0) == GENUS2_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    let status = match Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(src.path())
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler found; skipping");
            return;
        }
    };
    assert!(status.success());
}
