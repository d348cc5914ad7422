use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use softbte_core::collision::ConservationProjector;
use softbte_core::dynamics::{
    picard_step, simulate, InitialData, SimulationConfig, SimulationState, StepOptions, Stepper,
};
use softbte_core::kernel::GridSpec;
use softbte_core::{CollisionQuadrature, ModelParams, OutOfGrid, SpatialLayout, SphereRule, VelocityGrid};

fn quad() -> &'static CollisionQuadrature {
    static QUAD: OnceLock<CollisionQuadrature> = OnceLock::new();
    QUAD.get_or_init(|| {
        let grid = VelocityGrid::new(5.0, 8).unwrap();
        let p = ModelParams::new(-1.0, 0.1).unwrap();
        CollisionQuadrature::new(&grid, &p, SphereRule::default(), OutOfGrid::Clamp).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn picard_step_keeps_f_nonnegative(
        amplitude in 0.0f64..0.95,
        mode in 1u32..=3,
        dt in 0.01f64..2.0,
        seed in any::<u64>(),
        project in any::<bool>(),
        slab in any::<bool>(),
    ) {
        let q = quad();
        let grid = Arc::new(q.grid().clone());
        let layout = if slab {
            SpatialLayout::Slab1d { n_x: 4, period: 2.0 }
        } else {
            SpatialLayout::Homogeneous
        };
        let init = InitialData::Bump { amplitude, mode }.build(grid.clone(), layout, seed).unwrap();
        let projector = project.then(|| ConservationProjector::new(&grid).unwrap());
        let mut state = SimulationState::new(init.field).unwrap();
        for _ in 0..3 {
            picard_step(q, projector.as_ref(), &mut state, dt, &StepOptions::default()).unwrap();
            prop_assert!(state.field.check_nonnegative().is_ok());
        }
    }
}

fn last_norms(stepper: Stepper, dt: f64) -> (f64, f64) {
    let cfg = SimulationConfig {
        grid: GridSpec { radius: 5.0, n: 8 },
        init: InitialData::Bump { amplitude: 0.01, mode: 1 },
        dt,
        t_end: 0.4,
        stepper,
        step: StepOptions {
            conservation_project: false,
            ..StepOptions::default()
        },
        seed: 3,
        ..SimulationConfig::default()
    };
    let rec = softbte_core::dynamics::simulate_with(&cfg, quad()).unwrap();
    let row = rec.rows.last().unwrap();
    (row.h_sup, row.f_l2)
}

// The F-form and h-form steppers discretize the same equation; without the
// conservation projection their gap is first order in dt.
#[test]
fn f_form_and_h_form_agree_to_first_order() {
    let gaps: Vec<(f64, f64)> = [0.05, 0.025]
        .iter()
        .map(|&dt| {
            let (fa, fb) = last_norms(Stepper::Picard, dt);
            let (ha, hb) = last_norms(Stepper::HForm, dt);
            ((fa - ha).abs() / fa, (fb - hb).abs() / fb)
        })
        .collect();
    let (coarse, fine) = (gaps[0], gaps[1]);
    assert!(fine.0 <= 0.015 && fine.1 <= 0.06, "{fine:?}");
    assert!(coarse.0 / fine.0 > 1.6 && coarse.1 / fine.1 > 1.6, "{coarse:?} {fine:?}");
}

#[test]
fn simulate_matches_simulate_with() {
    let cfg = SimulationConfig {
        grid: GridSpec { radius: 5.0, n: 8 },
        t_end: 0.3,
        ..SimulationConfig::default()
    };
    let a = simulate(&cfg).unwrap();
    let b = softbte_core::dynamics::simulate_with(&cfg, quad()).unwrap();
    assert_eq!(a.rows, b.rows);
}
