//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libwclmmse_ffi.a");
    if !lib.exists() {
        panic!("static library not found at {}", lib.display());
    }
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "wclmmse.h"
int main(void) {
    WclModel *m = NULL;
    WclFilter *f = NULL;
    double a[2 * 6];
    double mse = 0.0;
    if (wcl_model_synthetic(2, 6, 1.0, 0.5, 1, &m) != WCL_STATUS_OK) return 1;
    if (wcl_filter_build(m, WCL_FILTER_KIND_LSJPC, 3, &f) != WCL_STATUS_OK) return 2;
    if (wcl_filter_copy_matrix(f, a, 12) != WCL_STATUS_OK) return 3;
    if (wcl_analytic_mse(m, f, &mse) != WCL_STATUS_OK) return 4;
    if (wcl_filter_build(m, WCL_FILTER_KIND_JPC, 0, &f) == WCL_STATUS_OK) return 5;
    if (wcl_last_error_message() == NULL) return 6;
    printf("%zu %.6f\n", wcl_filter_max_inverse_dim(f), mse);
    wcl_filter_free(f);
    wcl_model_free(m);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler not available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let dim: usize = text.split_whitespace().next().unwrap().parse().unwrap();
    assert!(dim <= 3);
}
