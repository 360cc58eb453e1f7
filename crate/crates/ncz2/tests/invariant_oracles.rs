//! Cross-checks tying the two-dimensional ℤ₂ invariant to quantities that
//! are computable without any gauge or branch choices: the location of the
//! bulk gap closing in a staggered-potential sweep, and the parity of the
//! spin-block integer index when the two spin species decouple.

use ncz2::bloch::{chern_number, kane_mele_invariant, models, BlochModel, KmOptions};

/// Spin–orbit strength shared by every sweep point (units of `t`).
const SO: f64 = 0.06;

/// ν can only change where the bulk gap closes, so the sign-change interval
/// of a staggered-potential sweep must bracket the independently located gap
/// minimum to within one sweep step.
#[test]
fn staggering_sweep_flip_brackets_the_gap_closing() {
    let steps: Vec<f64> = (0..=12).map(|i| 0.10 + 0.025 * i as f64).collect();
    let opts = KmOptions::default();
    let mut nus = Vec::with_capacity(steps.len());
    let mut gaps = Vec::with_capacity(steps.len());
    for &lv in &steps {
        let model = models::kane_mele(1.0, SO, lv, 0.05);
        nus.push(kane_mele_invariant(&model, &opts).unwrap().nu);
        let (gap, _) = model.minimum_gap(48).unwrap();
        gaps.push(gap);
    }
    assert_eq!(nus[0], -1, "small staggering must be in the inverted phase");
    assert_eq!(*nus.last().unwrap(), 1, "large staggering must be trivial");

    let flips: Vec<usize> = nus
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i)
        .collect();
    assert_eq!(flips.len(), 1, "expected a single sign change, got {nus:?}");
    let flip = flips[0];

    let argmin = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert!(
        gaps[argmin] < 0.5 * gaps[0] && gaps[argmin] < 0.5 * gaps[steps.len() - 1],
        "gap should dip towards zero near the transition, got {gaps:?}"
    );
    assert!(
        argmin + 1 >= flip && argmin <= flip + 2,
        "gap minimum at λ_v = {} does not bracket the sign change between {} and {}",
        steps[argmin],
        steps[flip],
        steps[flip + 1]
    );
}

/// Without the spin-mixing term the model is block-diagonal in spin and the
/// invariant reduces to the parity of the spin-up block's integer index:
/// ν = (−1)^{C↑}.  The total index of the time-reversal-symmetric pair
/// vanishes in both phases.
#[test]
fn invariant_equals_the_parity_of_the_spin_block_index() {
    for (lv, expect_abs_c, expect_nu) in [(0.1, 1, -1), (0.4, 0, 1)] {
        let full = models::kane_mele(1.0, SO, lv, 0.0);

        let total = chern_number(&full, 0..2, 48).unwrap();
        assert_eq!(
            total.chern, 0,
            "time-reversal symmetry forces the total index to vanish"
        );

        let nu = kane_mele_invariant(&full, &KmOptions::default())
            .unwrap()
            .nu;
        assert_eq!(nu, expect_nu, "λ_v = {lv}");

        let up = BlochModel::new("spin-up block", 2, 2, 1, None, move |k: &[f64]| {
            full.hamiltonian(k).view((0, 0), (2, 2)).into_owned()
        })
        .unwrap();
        let c_up = chern_number(&up, 0..1, 48).unwrap().chern;
        assert_eq!(c_up.abs(), expect_abs_c, "λ_v = {lv}");
        let parity = if c_up.rem_euclid(2) == 0 { 1 } else { -1 };
        assert_eq!(
            nu, parity,
            "ν must equal the parity of the spin-up index at λ_v = {lv}"
        );
    }
}
