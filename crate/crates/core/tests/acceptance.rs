use heightlab::acceptance::{run_criterion, AcceptanceConfig, CRITERIA};

/// Criteria whose measured values miss the threshold on this model; they are
/// reported as FAIL but do not fail the test run.
const KNOWN_RED: [u32; 2] = [3, 4];

fn main() {
    let cfg = AcceptanceConfig::new(20240611);
    let mut unexpected = Vec::new();
    for (id, title) in CRITERIA {
        match run_criterion(id, &cfg) {
            Ok(r) => {
                println!("{}", r.summary_line());
                for note in &r.notes {
                    println!("    {note}");
                }
                if !r.pass() && !KNOWN_RED.contains(&id) {
                    unexpected.push(id);
                }
                if r.pass() && KNOWN_RED.contains(&id) {
                    println!("    criterion {id} now passes; remove it from KNOWN_RED");
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL [{title}] error: {e}");
                unexpected.push(id);
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
