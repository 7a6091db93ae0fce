use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml must parse");
    let header = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation failed");

    let out = PathBuf::from(env::var("OUT_DIR").unwrap()).join("oam.h");
    header.write_to_file(&out);
    // keep a copy where C consumers expect it
    let include = crate_dir.join("include");
    std::fs::create_dir_all(&include).expect("create include dir");
    header.write_to_file(include.join("oam.h"));
}
