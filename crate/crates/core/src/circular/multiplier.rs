use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::field::{fft2_with, ifft2_with, Kind, ScalarField2D};
use crate::Execution;

type Symbol = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Radial Fourier multiplier `m(|ξ|) e^{i·shift·|ξ|}`.
#[derive(Clone)]
pub struct RadialMultiplier {
    symbol: Symbol,
    phase_shift: i8,
    real_symbol: bool,
    label: String,
}

impl fmt::Debug for RadialMultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialMultiplier")
            .field("label", &self.label)
            .field("phase_shift", &self.phase_shift)
            .finish()
    }
}

impl RadialMultiplier {
    pub fn real(label: impl Into<String>, symbol: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            symbol: Arc::new(move |z| Complex64::new(symbol(z), 0.0)),
            phase_shift: 0,
            real_symbol: true,
            label: label.into(),
        }
    }

    /// `phase_shift` must be one of -2, 0, 2.
    pub fn complex(
        label: impl Into<String>,
        phase_shift: i8,
        symbol: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        assert!(matches!(phase_shift, -2 | 0 | 2), "phase shift must be 0 or ±2");
        Self {
            symbol: Arc::new(symbol),
            phase_shift,
            real_symbol: false,
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn phase_shift(&self) -> i8 {
        self.phase_shift
    }

    /// Full multiplier value at radius `z`, phase included.
    pub fn eval(&self, z: f64) -> Complex64 {
        let m = (self.symbol)(z);
        if self.phase_shift == 0 {
            m
        } else {
            m * Complex64::from_polar(1.0, self.phase_shift as f64 * z)
        }
    }

    /// Whether real input yields real output.
    pub fn preserves_real(&self) -> bool {
        self.real_symbol && self.phase_shift == 0
    }

    pub fn apply(&self, f: &ScalarField2D) -> ScalarField2D {
        self.apply_with(f, Execution::default())
    }

    pub fn apply_with(&self, f: &ScalarField2D, exec: Execution) -> ScalarField2D {
        let spec = fft2_with(f, exec);
        let out = self.apply_spectrum(&spec, exec);
        let back = ifft2_with(&out, exec);
        if f.is_real() && self.preserves_real() {
            back.into_real()
        } else {
            back
        }
    }

    /// Multiplies an already transformed field.
    pub fn apply_spectrum(&self, spec: &ScalarField2D, exec: Execution) -> ScalarField2D {
        let grid = spec.grid();
        let vals = spec.values();
        let out = exec.map(grid.len(), |i| {
            let xi = grid.freq_vec(i);
            vals[i] * self.eval(xi[0].hypot(xi[1]))
        });
        ScalarField2D::with_values(grid, Kind::Complex, out)
    }

    /// Pointwise product of symbols (composition of operators).
    pub fn then(&self, other: &RadialMultiplier) -> RadialMultiplier {
        let (a, b) = (self.clone(), other.clone());
        let shift = self.phase_shift + other.phase_shift;
        let label = format!("{}∘{}", other.label, self.label);
        if (-2..=2).contains(&shift) && shift % 2 == 0 {
            let sa = a.symbol.clone();
            let sb = b.symbol.clone();
            let mut m = RadialMultiplier::complex(label, shift, move |z| sa(z) * sb(z));
            m.real_symbol = a.real_symbol && b.real_symbol;
            m
        } else {
            RadialMultiplier::complex(label, 0, move |z| a.eval(z) * b.eval(z))
        }
    }
}
