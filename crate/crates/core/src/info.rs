//! Shannon measures in bits. Zero-mass terms contribute nothing.

use crate::error::{Error, Result};
use crate::prob::{JointPmf, Pmf};

/// `p * log2(p / q)`, with the `0 log 0` convention.
#[inline]
pub(crate) fn kl_term(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        // plug-in estimates cannot put mass where the reference has none
        debug_assert!(q > 0.0, "p = {p} against q = 0");
        p * (p / q).log2()
    } else {
        0.0
    }
}

pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// I(X;Y) of a two-axis joint.
pub fn mutual_information(joint: &JointPmf) -> Result<f64> {
    let shape = joint.shape();
    if shape.len() != 2 {
        return Err(Error::Dimension(format!(
            "mutual information needs a two-axis joint, got {} axes",
            shape.len()
        )));
    }
    let (nx, ny) = (shape[0], shape[1]);
    Ok(mi_of_matrix(joint.probs(), nx, ny))
}

/// MI of a row-major `nx × ny` nonnegative array, normalized internally.
pub(crate) fn mi_of_matrix(p: &[f64], nx: usize, ny: usize) -> f64 {
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut px = vec![0.0; nx];
    let mut py = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            let v = p[x * ny + y] / total;
            px[x] += v;
            py[y] += v;
        }
    }
    let mut mi = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let v = p[x * ny + y] / total;
            mi += kl_term(v, px[x] * py[y]);
        }
    }
    mi.max(0.0)
}

/// I(X;Y | Y⁻ = g) for a joint laid out over `(X⁻, Y, Y⁻)`.
pub fn conditional_mutual_information(joint: &JointPmf, condition: usize) -> Result<f64> {
    let shape = joint.shape();
    if shape.len() != 3 {
        return Err(Error::Dimension(format!(
            "conditional mutual information needs a (X, Y, Y-) joint, got {} axes",
            shape.len()
        )));
    }
    let (nx, ny, ng) = (shape[0], shape[1], shape[2]);
    if condition >= ng {
        return Err(Error::Dimension(format!("condition {condition} out of range {ng}")));
    }
    let probs = joint.probs();
    let slice: Vec<f64> = (0..nx * ny).map(|xy| probs[xy * ng + condition]).collect();
    let mass: f64 = slice.iter().sum();
    if mass <= 0.0 {
        return Err(Error::UndefinedCondition { condition });
    }
    Ok(mi_of_matrix(&slice, nx, ny))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;

    fn joint2(p: Vec<f64>, nx: usize, ny: usize) -> JointPmf {
        JointPmf::new(vec![Alphabet::indexed(nx), Alphabet::indexed(ny)], p).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Pmf::from_probs(vec![0.0, 1.0, 0.0]).unwrap()), 0.0);
        assert!((entropy(&Pmf::from_probs(vec![0.25; 4]).unwrap()) - 2.0).abs() < 1e-15);
        // -(0.9 log2 0.9 + 0.1 log2 0.1), evaluated independently
        let h = entropy(&Pmf::from_probs(vec![0.9, 0.1]).unwrap());
        assert!((h - 0.468_995_593_589_281_2).abs() < 1e-12, "{h}");
    }

    #[test]
    fn mutual_information_examples() {
        assert!(mutual_information(&joint2(vec![0.25; 4], 2, 2)).unwrap().abs() < 1e-15);
        assert!((mutual_information(&joint2(vec![0.5, 0.0, 0.0, 0.5], 2, 2)).unwrap() - 1.0).abs() < 1e-15);
        // 0.8 log2(0.4/0.25) + 0.2 log2(0.1/0.25)
        let mi = mutual_information(&joint2(vec![0.4, 0.1, 0.1, 0.4], 2, 2)).unwrap();
        assert!((mi - 0.278_071_905_112_637_74).abs() < 1e-12, "{mi}");
    }

    #[test]
    fn mutual_information_needs_two_axes() {
        let j = JointPmf::new(vec![Alphabet::indexed(2)], vec![0.5, 0.5]).unwrap();
        assert!(matches!(mutual_information(&j), Err(Error::Dimension(_))));
    }

    #[test]
    fn cmi_conditional_independence_is_zero() {
        // p(x, y, g) = p(g) p(x|g) p(y|g)
        let pg = [0.3, 0.7];
        let px = [[0.2, 0.8], [0.6, 0.4]];
        let py = [[0.5, 0.5], [0.9, 0.1]];
        let mut p = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                for g in 0..2 {
                    p[(x * 2 + y) * 2 + g] = pg[g] * px[g][x] * py[g][y];
                }
            }
        }
        let j = JointPmf::new(vec![Alphabet::indexed(2); 3], p).unwrap();
        for g in 0..2 {
            assert!(conditional_mutual_information(&j, g).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn cmi_single_condition_equals_mi() {
        let p = vec![0.4, 0.1, 0.1, 0.4];
        let j3 = JointPmf::new(
            vec![Alphabet::indexed(2), Alphabet::indexed(2), Alphabet::indexed(1)],
            p.clone(),
        )
        .unwrap();
        let cmi = conditional_mutual_information(&j3, 0).unwrap();
        let mi = mutual_information(&joint2(p, 2, 2)).unwrap();
        assert!((cmi - mi).abs() < 1e-15);
    }

    #[test]
    fn cmi_zero_mass_condition_errors() {
        let j = JointPmf::new(
            vec![Alphabet::indexed(2); 3],
            vec![0.25, 0.0, 0.25, 0.0, 0.25, 0.0, 0.25, 0.0],
        )
        .unwrap();
        assert_eq!(
            conditional_mutual_information(&j, 1),
            Err(Error::UndefinedCondition { condition: 1 })
        );
    }
}
