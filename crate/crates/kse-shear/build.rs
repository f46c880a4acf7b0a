use std::process::Command;

fn main() {
    let describe = Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string());
    if let Some(d) = describe {
        println!("cargo:rustc-env=KSE_SHEAR_GIT_DESCRIBE={d}");
    }
    println!("cargo:rerun-if-changed=build.rs");
}
