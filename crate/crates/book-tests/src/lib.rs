//! Compiles and runs the Rust snippets of the guide in `book/src`.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub mod $name {}
    };
}

chapter!(introduction, "introduction.md");
chapter!(operators, "operators.md");
chapter!(krylov, "krylov.md");
chapter!(preconditioner, "preconditioner.md");
chapter!(theta, "theta.md");
chapter!(ritz, "ritz.md");
chapter!(data_assimilation, "data-assimilation.md");
chapter!(cli, "cli.md");

#[doc = include_str!("../../../README.md")]
pub mod readme {}
