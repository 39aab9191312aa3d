//! Error function and standard-normal quantile.
//!
//! Normal sampling goes through the inverse CDF so that replays are
//! bit-stable across platforms; rejection-style samplers (ziggurat)
//! consume a data-dependent number of uniforms and would break seeded
//! stream alignment between equivalent automata.
//!
//! `erf`/`erfc` follow W. J. Cody's rational approximations (double
//! precision, relative error below 1e-15). `norm_quantile` is Wichura's
//! PPND16 algorithm (AS 241). Both are cross-checked against numeric
//! quadrature oracles in the test module.

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

// Cody segment 1: |x| <= 0.46875, erf(x) = x * P(x^2)/Q(x^2).
const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];

// Cody segment 2: 0.46875 < x <= 4, erfc(x) = exp(-x^2) * P(x)/Q(x).
const ERF_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERF_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];

// Cody segment 3: x > 4, erfc(x) = exp(-x^2)/x * (1/sqrt(pi) + P(1/x^2)/Q(1/x^2)/x^2).
const ERF_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERF_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

fn erf_small(x: f64) -> f64 {
    let z = x * x;
    let mut num = ERF_A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + ERF_A[i]) * z;
        den = (den + ERF_B[i]) * z;
    }
    x * (num + ERF_A[3]) / (den + ERF_B[3])
}

fn erfc_mid(x: f64) -> f64 {
    let mut num = ERF_C[8] * x;
    let mut den = x;
    for i in 0..7 {
        num = (num + ERF_C[i]) * x;
        den = (den + ERF_D[i]) * x;
    }
    (-x * x).exp() * (num + ERF_C[7]) / (den + ERF_D[7])
}

fn erfc_large(x: f64) -> f64 {
    if x > 26.5 {
        return 0.0;
    }
    let z = 1.0 / (x * x);
    let mut num = ERF_P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + ERF_P[i]) * z;
        den = (den + ERF_Q[i]) * z;
    }
    let poly = z * (num + ERF_P[4]) / (den + ERF_Q[4]);
    ((-x * x).exp() / x) * (FRAC_1_SQRT_PI - poly)
}

pub fn erfc(x: f64) -> f64 {
    let ax = x.abs();
    let tail = if ax <= 0.46875 {
        return 1.0 - erf_small(x);
    } else if ax <= 4.0 {
        erfc_mid(ax)
    } else {
        erfc_large(ax)
    };
    if x >= 0.0 {
        tail
    } else {
        2.0 - tail
    }
}

pub fn erf(x: f64) -> f64 {
    if x.abs() <= 0.46875 {
        erf_small(x)
    } else {
        1.0 - erfc(x)
    }
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

// AS 241 (PPND16) coefficient tables.
const PPND_A: [f64; 8] = [
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
const PPND_B: [f64; 7] = [
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
const PPND_C: [f64; 8] = [
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
const PPND_D: [f64; 7] = [
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
const PPND_E: [f64; 8] = [
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
const PPND_F: [f64; 7] = [
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

fn poly8_over_poly7(r: f64, num: &[f64; 8], den: &[f64; 7]) -> f64 {
    let mut n = num[7];
    for c in num[..7].iter().rev() {
        n = n * r + c;
    }
    let mut d = den[6];
    for c in den[..6].iter().rev() {
        d = d * r + c;
    }
    d = d * r + 1.0;
    n / d
}

/// Standard normal quantile (inverse CDF), p in (0, 1).
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must be in (0,1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly8_over_poly7(r, &PPND_A, &PPND_B);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        poly8_over_poly7(r - 1.6, &PPND_C, &PPND_D)
    } else {
        poly8_over_poly7(r - 5.0, &PPND_E, &PPND_F)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}
