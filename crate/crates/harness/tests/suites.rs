use tacmm::strategies::{LiftMode, Strategy};
use tacmm::world::{KinematicNoise, VisionNoise};
use tacmm_harness::config::{ExperimentConfig, Sensing, SweepMode};
use tacmm_harness::report::{self, Parsed};
use tacmm_harness::seeds::derive_seed;
use tacmm_harness::{run_lift_suite, run_pose_sweep, HarnessError, LiftSuiteReport, SweepReport};

fn bumper_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::calibrated();
    c.sweep.modes = vec![SweepMode::Bumper, SweepMode::Vision];
    c.lift.sensing = Sensing::Bumper;
    c.lift.trials = 10;
    c
}

#[test]
fn seed_derivation_is_pinned() {
    let s = derive_seed("empty_box", "tactile", 0, 2024);
    let again: u64 = {
        use sha2_free::first_u64;
        first_u64(b"empty_box\0tactile\0", 0, 2024)
    };
    assert_eq!(s, again);
}

/// An independent re-derivation of the documented layout.
mod sha2_free {
    pub fn first_u64(prefix: &[u8], trial: u64, master: u64) -> u64 {
        let mut msg = prefix.to_vec();
        msg.extend_from_slice(&trial.to_le_bytes());
        msg.extend_from_slice(&master.to_le_bytes());
        let d = sha256(&msg);
        u64::from_le_bytes(d[..8].try_into().unwrap())
    }

    /// Textbook SHA-256.
    fn sha256(msg: &[u8]) -> [u8; 32] {
        const K: [u32; 64] = [
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5, 0xd807aa98,
            0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
            0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8,
            0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
            0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819,
            0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
            0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2,
        ];
        let mut h: [u32; 8] = [
            0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
        ];
        let mut data = msg.to_vec();
        data.push(0x80);
        while data.len() % 64 != 56 {
            data.push(0);
        }
        data.extend_from_slice(&((msg.len() as u64) * 8).to_be_bytes());
        for chunk in data.chunks(64) {
            let mut w = [0u32; 64];
            for i in 0..16 {
                w[i] = u32::from_be_bytes(chunk[4 * i..4 * i + 4].try_into().unwrap());
            }
            for i in 16..64 {
                let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
                let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
                w[i] = w[i - 16].wrapping_add(s0).wrapping_add(w[i - 7]).wrapping_add(s1);
            }
            let mut v = h;
            for i in 0..64 {
                let s1 = v[4].rotate_right(6) ^ v[4].rotate_right(11) ^ v[4].rotate_right(25);
                let ch = (v[4] & v[5]) ^ (!v[4] & v[6]);
                let t1 = v[7].wrapping_add(s1).wrapping_add(ch).wrapping_add(K[i]).wrapping_add(w[i]);
                let s0 = v[0].rotate_right(2) ^ v[0].rotate_right(13) ^ v[0].rotate_right(22);
                let maj = (v[0] & v[1]) ^ (v[0] & v[2]) ^ (v[1] & v[2]);
                let t2 = s0.wrapping_add(maj);
                v = [t1.wrapping_add(t2), v[0], v[1], v[2], v[3].wrapping_add(t1), v[4], v[5], v[6]];
            }
            for (a, b) in h.iter_mut().zip(v) {
                *a = a.wrapping_add(b);
            }
        }
        let mut out = [0u8; 32];
        for (i, x) in h.iter().enumerate() {
            out[4 * i..4 * i + 4].copy_from_slice(&x.to_be_bytes());
        }
        out
    }
}

#[test]
fn noiseless_multi_contact_sweep_is_exact() {
    let mut c = bumper_config();
    c.world.kinematic = KinematicNoise::NONE;
    c.sweep.modes = vec![SweepMode::Bumper];
    c.sweep.strategies = vec![Strategy::MultiContact];
    let rep = run_pose_sweep(&c, None).unwrap();
    assert_eq!(rep.rows.len(), 11 * 5);
    for cell in rep.cells() {
        assert!(cell.mae_angle_deg < 0.1, "{cell:?}");
        assert!(cell.mae_distance_mm < 1.0, "{cell:?}");
    }
}

#[test]
fn perfect_information_lifts_always_succeed() {
    let mut c = bumper_config();
    c.world.kinematic = KinematicNoise::NONE;
    c.world.vision = VisionNoise::NONE;
    c.lift.trials = 50;
    let rep = run_lift_suite(&c, None).unwrap();
    for r in rep.rates() {
        assert_eq!((r.tactile, r.vision), (Some(1.0), Some(1.0)), "{}", r.scenario);
    }
}

#[test]
fn csv_round_trips_through_report() {
    let c = bumper_config();
    let sweep = run_pose_sweep(&c, None).unwrap();
    let lift = run_lift_suite(&c, None).unwrap();
    assert_eq!(SweepReport::from_csv(&sweep.to_csv(), "s").unwrap(), sweep);
    assert_eq!(LiftSuiteReport::from_csv(&lift.to_csv(), "l").unwrap(), lift);
    assert!(matches!(report::parse_csv(&sweep.to_csv(), "s").unwrap(), Parsed::Sweep(_)));
    assert!(matches!(report::parse_csv(&lift.to_csv(), "l").unwrap(), Parsed::Lift(_)));
}

#[test]
fn tables_have_the_expected_shape() {
    let c = bumper_config();
    let sweep = run_pose_sweep(&c, None).unwrap();
    let table = report::sweep_table(&sweep);
    let block: Vec<&str> = table
        .split("\n\n")
        .find(|b| b.contains("multi_contact / bumper"))
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .collect();
    // Title, column header, then one row per angle from -25 to 25.
    assert_eq!(block.len(), 2 + 11);
    assert!(block[2].trim_start().starts_with("-25.0"));
    assert!(block[12].trim_start().starts_with("25.0"));

    let lift = run_lift_suite(&c, None).unwrap();
    let table = report::lift_table(&lift);
    let lines: Vec<&str> = table.lines().filter(|l| !l.is_empty()).collect();
    assert_eq!(lines.len(), 1 + 5 + 1);
    assert!(lines[6].starts_with("average"));
}

#[test]
fn malformed_inputs_produce_no_output() {
    let c = bumper_config();
    let good = run_lift_suite(&c, None).unwrap().to_csv();
    let bad = good.replacen("tactile", "telepathy", 1);
    let inputs = vec![("good.csv".to_string(), good.clone()), ("bad.csv".to_string(), bad)];
    match report::render(&inputs) {
        Err(HarnessError::Csv { origin, row, .. }) => {
            assert_eq!(origin, "bad.csv");
            assert_eq!(row, 1);
        }
        other => panic!("{other:?}"),
    }
    for empty in ["", "scenario,mode,seed,success,failure_cause,ticks\n"] {
        let r = report::render(&[("e.csv".to_string(), empty.to_string())]);
        assert!(matches!(r, Err(HarnessError::Csv { .. })), "{r:?}");
    }
    let truncated = format!("{good}empty_box,vision,3\n");
    let err = report::render(&[("t.csv".to_string(), truncated)]).unwrap_err();
    assert!(err.to_string().contains("row"), "{err}");
}

#[test]
fn suites_are_deterministic_per_seed() {
    let c = bumper_config();
    assert_eq!(run_pose_sweep(&c, None).unwrap().to_csv(), run_pose_sweep(&c, None).unwrap().to_csv());
    assert_eq!(run_lift_suite(&c, None).unwrap().to_csv(), run_lift_suite(&c, None).unwrap().to_csv());
    let mut other = c.clone();
    other.seed += 1;
    assert_ne!(run_lift_suite(&c, None).unwrap().to_csv(), run_lift_suite(&other, None).unwrap().to_csv());
}

#[test]
fn regressor_modes_require_a_model() {
    let mut c = ExperimentConfig::calibrated();
    assert!(matches!(run_pose_sweep(&c, None), Err(HarnessError::Usage(_))));
    assert!(matches!(run_lift_suite(&c, None), Err(HarnessError::Usage(_))));
    c.lift.modes = vec![LiftMode::Vision];
    c.lift.trials = 2;
    assert!(run_lift_suite(&c, None).is_ok());
}
