use thiserror::Error;

/// Errors from polynomial arithmetic and parsing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("q = {0} is not a prime")]
    NotPrime(u32),
    #[error("field mismatch: F_{left} vs F_{right}")]
    FieldMismatch { left: u32, right: u32 },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("gcd of two zero polynomials")]
    BothZero,
    #[error("polynomial must have degree at least 1")]
    ConstantPolynomial,
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("integer overflow")]
    Overflow,
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Errors from the character, L-function, prime-sum and moment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("modulus must be monic")]
    NotMonic,
    #[error("modulus must have degree at least 2, got {0}")]
    ModulusDegree(usize),
    #[error("unit group too large: {0} residues")]
    GroupTooLarge(u64),
    #[error("unit group basis failed verification: {0}")]
    BasisVerification(String),
    #[error("operation requires a non-principal character")]
    PrincipalCharacter,
    #[error("operation requires a primitive character")]
    ImprimitiveCharacter,
    #[error("h = {h} out of range 1..={max}")]
    CutoffOutOfRange { h: usize, max: usize },
    #[error("zeta_A has a pole at this point")]
    ZetaPole,
    #[error("invalid shift spec: {0}")]
    InvalidShift(String),
    #[error("no primitive characters for this modulus")]
    NoPrimitiveCharacters,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Perron radius must satisfy 0 < r < 1, got {0}")]
    PerronRadius(f64),
    #[error("Perron sample count {got} below the minimum {min}")]
    PerronSamples { got: usize, min: usize },
    #[error("quadrature needs at least {min} points, got {got}")]
    QuadraturePoints { got: usize, min: usize },
}
