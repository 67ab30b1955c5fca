//! Single- and two-qubit gates on big-endian registers (qubit 0 is the most
//! significant index bit).

// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::qmat::{kron, CMatrix, C64, ONE, ZERO};

pub fn pauli_x() -> CMatrix {
    CMatrix::from_vec(2, 2, alloc::vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_z() -> CMatrix {
    CMatrix::diag(&[1.0, -1.0])
}

/// `exp(-i θ X / 2)`.
pub fn rx(theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_vec(2, 2, alloc::vec![C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)])
        .unwrap()
}

/// `exp(-i θ Y / 2)`.
pub fn ry(theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_real(2, 2, &[c, -s, s, c]).unwrap()
}

/// `exp(-i θ Z / 2)`.
pub fn rz(theta: f64) -> CMatrix {
    let half = theta / 2.0;
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::from_polar(1.0, -half);
    m[(1, 1)] = C64::from_polar(1.0, half);
    m
}

/// General rotation `Rz(c) · Ry(b) · Rz(a)`.
pub fn rot(a: f64, b: f64, c: f64) -> CMatrix {
    rz(c).matmul(&ry(b)).matmul(&rz(a))
}

/// Lifts a single-qubit operator onto qubit `q` of an `n`-qubit register.
pub fn on_qubit(op: &CMatrix, q: usize, n: usize) -> CMatrix {
    assert!(q < n, "qubit index out of range");
    let left = CMatrix::identity(1 << q);
    let right = CMatrix::identity(1 << (n - q - 1));
    kron(&kron(&left, op), &right)
}

/// Tensor product of one single-qubit operator per qubit, qubit 0 first.
pub fn tensor_all(ops: &[CMatrix]) -> CMatrix {
    ops.iter().fold(CMatrix::identity(1), |acc, op| kron(&acc, op))
}

/// CNOT as a permutation matrix on `n` qubits.
pub fn cnot(control: usize, target: usize, n: usize) -> CMatrix {
    assert!(control < n && target < n && control != target, "invalid CNOT qubits");
    let dim = 1usize << n;
    let cbit = 1usize << (n - 1 - control);
    let tbit = 1usize << (n - 1 - target);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let row = if col & cbit != 0 { col ^ tbit } else { col };
        m[(row, col)] = ONE;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_are_unitary() {
        for &t in &[0.0, 0.3, -1.2, 3.0] {
            for g in [rx(t), ry(t), rz(t), rot(t, 0.5 * t, -t)] {
                assert!(g.matmul(&g.dagger()).max_abs_diff(&CMatrix::identity(2)) < 1e-14);
            }
        }
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let c = cnot(0, 1, 2);
        // |10> -> |11>
        assert_eq!(c[(3, 2)], ONE);
        assert_eq!(c[(0, 0)], ONE);
        let on_x = on_qubit(&pauli_x(), 1, 2);
        assert_eq!(on_x[(1, 0)], ONE);
    }

    #[test]
    fn ry_half_pi_gives_plus() {
        let v = ry(core::f64::consts::FRAC_PI_2).column(0);
        let s = 0.5f64.sqrt();
        assert!((v[0].re - s).abs() < 1e-15 && (v[1].re - s).abs() < 1e-15);
    }
}
