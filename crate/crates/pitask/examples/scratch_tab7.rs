use pitask::game::{canonical_metric, TaskSpec};
use pitask::seesaw::{seesaw, SeesawConfig};

fn main() {
    for (n, m, dims) in [(4u8, 1u8, vec![2usize, 3, 4]), (4, 2, vec![2, 3])] {
        let task = TaskSpec::new(n, m).unwrap();
        let metric = canonical_metric(&task);
        for d in dims {
            let t0 = std::time::Instant::now();
            let cfg = SeesawConfig::new(d).with_seed(7).with_restarts(20);
            let result = seesaw(&task, &metric, &cfg).unwrap();
            println!(
                "T_{{{n},{m}}} d={d}: {:.9}  ({} restarts, best={} converged={} rounds={}, {:?})",
                result.best_value,
                result.traces.len(),
                result.best_restart,
                result.converged,
                result.traces[result.best_restart].rounds,
                t0.elapsed()
            );
        }
    }
}
