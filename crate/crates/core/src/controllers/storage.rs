use super::{price_factor, ControlAction, ControllerContext, HeuristicConfig, PriceEcdf};
use crate::error::Result;
use crate::model::round_modulation;

/// Position of `t` inside `[lower, upper]`, clamped to [0, 1].
pub fn state_of_charge(t: f64, lower: f64, upper: f64) -> f64 {
    ((t - lower) / (upper - lower)).clamp(0.0, 1.0)
}

/// One minus the mean state of charge.
pub fn storage_factor(charges: &[f64]) -> f64 {
    if charges.is_empty() {
        return 0.0;
    }
    1.0 - charges.iter().sum::<f64>() / charges.len() as f64
}

pub fn psc_modulation(price_factor: f64, storage_factor: f64, threshold: f64) -> f64 {
    round_modulation(price_factor * storage_factor, threshold)
}

/// Shortfall of each room below its lower bound, K.
pub fn deficits(prev_air_c: &[f64], lower: &[f64]) -> Vec<f64> {
    prev_air_c
        .iter()
        .zip(lower)
        .map(|(&t, &lb)| (lb - t).max(0.0))
        .collect()
}

/// Splits `total` proportionally to `weights`, or equally when all are zero.
pub fn distribute(total: f64, weights: &[f64]) -> Vec<f64> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let sum: f64 = weights.iter().sum();
    let mut out: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|&w| total * (w / sum)).collect()
    } else {
        vec![total / n as f64; n]
    };
    // put the rounding residue on the largest share so the sum is exact
    let residue = total - out.iter().sum::<f64>();
    if residue != 0.0 {
        let big = (0..n).max_by(|&a, &b| out[a].total_cmp(&out[b])).unwrap_or(0);
        out[big] = (out[big] + residue).max(0.0);
    }
    out
}

pub fn psc_step(ctx: &ControllerContext<'_>, ecdf: &PriceEcdf, cfg: &HeuristicConfig) -> Result<ControlAction> {
    ctx.validate()?;
    let chi_p = price_factor(ecdf, ctx.price);
    let charges: Vec<f64> = (0..ctx.n_rooms())
        .map(|j| state_of_charge(ctx.prev_air_c[j], ctx.lower[j], ctx.upper[j]))
        .collect();
    let chi_s = storage_factor(&charges);
    let modulation = psc_modulation(chi_p, chi_s, cfg.rounding_threshold);
    ControlAction::at_modulation(
        modulation,
        &deficits(ctx.prev_air_c, ctx.lower),
        ctx.ambient_c,
        ctx.curve,
    )
}

/// Price-only rule: modulation from the price factor alone.
///
/// With the upper cutoff enabled, rooms at or above their upper bound get
/// nothing and the pump output shrinks by their equal share.
pub fn pc_step(ctx: &ControllerContext<'_>, ecdf: &PriceEcdf, cfg: &HeuristicConfig) -> Result<ControlAction> {
    ctx.validate()?;
    let n = ctx.n_rooms();
    let eligible: Vec<bool> = (0..n)
        .map(|j| !cfg.pc_upper_cutoff || ctx.prev_air_c[j] < ctx.upper[j])
        .collect();
    let n_eligible = eligible.iter().filter(|&&e| e).count();
    if n_eligible == 0 {
        return Ok(ControlAction::zero(n));
    }
    let chi_p = price_factor(ecdf, ctx.price);
    let modulation = round_modulation(chi_p * n_eligible as f64 / n as f64, cfg.rounding_threshold);
    let d = deficits(ctx.prev_air_c, ctx.lower);
    let any_deficit = (0..n).any(|j| eligible[j] && d[j] > 0.0);
    let weights: Vec<f64> = (0..n)
        .map(|j| match (eligible[j], any_deficit) {
            (false, _) => 0.0,
            (true, true) => d[j],
            (true, false) => 1.0,
        })
        .collect();
    ControlAction::at_modulation(modulation, &weights, ctx.ambient_c, ctx.curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::ecdf_build;
    use crate::model::HeatPumpCurve;

    fn distinct_day() -> PriceEcdf {
        ecdf_build(&(0..24).map(|h| 10.0 + h as f64).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn charge_examples() {
        assert_eq!(state_of_charge(22.6, 22.6, 24.0), 0.0);
        assert_eq!(state_of_charge(24.0, 22.6, 24.0), 1.0);
        assert_eq!(state_of_charge(21.6, 22.6, 24.0), 0.0);
        assert_eq!(state_of_charge(31.0, 16.0, 30.0), 1.0);
    }

    #[test]
    fn storage_examples() {
        assert_eq!(storage_factor(&[1.0; 5]), 0.0);
        assert_eq!(storage_factor(&[0.0; 5]), 1.0);
        assert!((storage_factor(&[1.0, 0.0, 0.0, 0.0, 0.0]) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn modulation_examples() {
        assert!((psc_modulation(0.6, 0.5, 0.1) - 0.3).abs() < 1e-15);
        assert_eq!(psc_modulation(0.5, 0.3, 0.1), 0.2);
        assert_eq!(psc_modulation(0.0, 0.9, 0.1), 0.0);
        assert_eq!(psc_modulation(0.3, 0.3, 0.1), 0.0);
    }

    #[test]
    fn deficit_examples() {
        assert_eq!(deficits(&[23.0; 3], &[22.6; 3]), vec![0.0; 3]);
        assert_eq!(deficits(&[21.6, 23.0, 23.0], &[22.6; 3]), vec![1.0, 0.0, 0.0]);
        let d = deficits(&[20.6, 21.6, 23.0, 23.0, 23.0], &[22.6; 5]);
        assert!((d[0] - 2.0).abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-12);
        assert_eq!(&d[2..], &[0.0; 3]);
    }

    #[test]
    fn distribute_examples() {
        assert_eq!(
            distribute(1000.0, &[1.0, 0.0, 0.0, 0.0, 0.0]),
            vec![1000.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(distribute(1000.0, &[0.0; 5]), vec![200.0; 5]);
        assert_eq!(
            distribute(900.0, &[2.0, 1.0, 0.0, 0.0, 0.0]),
            vec![600.0, 300.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(distribute(0.0, &[0.3, 0.7]), vec![0.0, 0.0]);
    }

    fn ctx<'a>(
        t: &'a [f64],
        lb: &'a [f64],
        ub: &'a [f64],
        price: f64,
        curve: &'a HeatPumpCurve,
    ) -> ControllerContext<'a> {
        ControllerContext {
            prev_air_c: t,
            lower: lb,
            upper: ub,
            price,
            ambient_c: 2.0,
            curve,
            dt: 900.0,
        }
    }

    #[test]
    fn psc_examples() {
        let curve = HeatPumpCurve::reference();
        let e = distinct_day();
        let cfg = HeuristicConfig::default();
        let lb = [22.6; 5];
        let ub = [24.0; 5];

        let full = psc_step(&ctx(&[24.0; 5], &lb, &ub, 10.0, &curve), &e, &cfg).unwrap();
        assert_eq!(full, ControlAction::zero(5));

        let dear = psc_step(&ctx(&[18.0; 5], &lb, &ub, 33.0, &curve), &e, &cfg).unwrap();
        assert_eq!(dear.power_w, 0.0);
        assert_eq!(dear.total_heat(), 0.0);

        let cheap = psc_step(&ctx(&[22.6; 5], &lb, &ub, 10.0, &curve), &e, &cfg).unwrap();
        assert!((cheap.modulation - 23.0 / 24.0).abs() < 1e-12);
        assert!((cheap.power_w - 23.0 / 24.0 * 4830.0).abs() < 1e-9);
        let each = cheap.power_w * 2.71 / 5.0;
        for q in &cheap.heat_w {
            assert!((q - each).abs() < 1e-9);
        }
    }

    #[test]
    fn pc_examples() {
        let curve = HeatPumpCurve::reference();
        let e = distinct_day();
        let cfg = HeuristicConfig::default();
        let lb = [22.6; 5];
        let ub = [24.0; 5];
        assert_eq!(
            pc_step(&ctx(&[24.0; 5], &lb, &ub, 10.0, &curve), &e, &cfg).unwrap(),
            ControlAction::zero(5)
        );
        assert_eq!(
            pc_step(&ctx(&[20.0; 5], &lb, &ub, 33.0, &curve), &e, &cfg)
                .unwrap()
                .power_w,
            0.0
        );

        let t = [23.0, 22.0, 23.5, 24.2, 22.7];
        let c = ctx(&t, &lb, &ub, 14.0, &curve);
        let pc = pc_step(&c, &e, &cfg).unwrap();
        let psc = psc_step(&c, &e, &cfg).unwrap();
        assert!(pc.total_heat() >= psc.total_heat());
        assert_eq!(pc.heat_w[3], 0.0);
        // only room 2 is below its lower bound
        assert!((pc.heat_w[1] - pc.total_heat()).abs() < 1e-9);
        // four of five rooms eligible
        assert!((pc.modulation - (1.0 - 5.0 / 24.0) * 0.8).abs() < 1e-12);
    }

    #[test]
    fn pc_equal_split_among_eligible() {
        let curve = HeatPumpCurve::reference();
        let e = distinct_day();
        let t = [23.0, 24.5];
        let pc = pc_step(
            &ctx(&t, &[22.6; 2], &[24.0; 2], 10.0, &curve),
            &e,
            &HeuristicConfig::default(),
        )
        .unwrap();
        assert_eq!(pc.heat_w[1], 0.0);
        assert!(pc.heat_w[0] > 0.0);
        let uncapped = HeuristicConfig {
            pc_upper_cutoff: false,
            ..HeuristicConfig::default()
        };
        let pc = pc_step(&ctx(&t, &[22.6; 2], &[24.0; 2], 10.0, &curve), &e, &uncapped).unwrap();
        assert!((pc.heat_w[0] - pc.heat_w[1]).abs() < 1e-9);
    }
}
