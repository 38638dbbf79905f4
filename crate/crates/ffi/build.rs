use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("cargo sets CARGO_MANIFEST_DIR"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("FUNSTACK_H".into()),
        header: Some("/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */".into()),
        cpp_compat: true,
        documentation: true,
        enumeration: cbindgen::EnumConfig { prefix_with_name: true, ..Default::default() },
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(&dir)
        .with_config(config)
        .generate()
        .expect("cbindgen could not parse the FFI crate")
        .write_to_file(dir.join("include/funstack.h"));
}
