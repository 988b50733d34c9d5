use super::TestFunction;
use crate::ensemble::AssembledPair;
use crate::error::Result;
use crate::measures::EmpiricalMeasure2D;

/// `∫f dμ_A − ∫f dμ_B` for each test function.
pub fn replacement_check(
    pair: &AssembledPair,
    test_functions: &[&dyn TestFunction],
) -> Result<Vec<f64>> {
    let esd_a = EmpiricalMeasure2D::spectral_distribution(&pair.a_matrix)?;
    let esd_b = if pair.a_matrix == pair.b_matrix {
        esd_a.clone()
    } else {
        EmpiricalMeasure2D::spectral_distribution(&pair.b_matrix)?
    };
    Ok(test_functions
        .iter()
        .map(|f| esd_a.integrate(|z| f.value(z)) - esd_b.integrate(|z| f.value(z)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{default_test_functions, ConstantFunction};
    use crate::ensemble::{
        assemble, build_perturbation, sample_matrix, EntryDistribution, PerturbationSpec,
    };
    use crate::matrix::ComplexMatrix;

    #[test]
    fn zero_perturbation_gives_exact_zero() {
        let x = sample_matrix(EntryDistribution::ComplexGaussian, 30, 2).unwrap();
        let pair = assemble(&x, &ComplexMatrix::zeros(30, 30)).unwrap();
        let fns = default_test_functions();
        let refs: Vec<&dyn TestFunction> = fns.iter().map(|f| f.as_ref()).collect();
        assert!(replacement_check(&pair, &refs)
            .unwrap()
            .iter()
            .all(|&d| d == 0.0));
    }

    #[test]
    fn constant_function_sees_equal_mass() {
        let x = sample_matrix(EntryDistribution::ComplexGaussian, 30, 2).unwrap();
        let m = build_perturbation(&PerturbationSpec::all_ones(1.0), 30).unwrap();
        let pair = assemble(&x, &m).unwrap();
        let d = replacement_check(&pair, &[&ConstantFunction(1.0)]).unwrap();
        assert!(d[0].abs() < 1e-14);
    }
}
