fn main() {
    // ndarray-linalg is used without a vendored backend; link the system
    // OpenBLAS, which provides BLAS, CBLAS and LAPACK in one library.
    println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu");
    println!("cargo:rustc-link-lib=dylib=openblas");
}
