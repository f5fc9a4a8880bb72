/// Tries `initial`, `initial/2`, `initial/4`, ... and returns the first
/// stepsize `attempt` accepts, together with what it produced.
///
/// At most `max_halvings + 1` stepsizes are tried.
pub fn halve_stepsize<R>(
    initial: f64,
    max_halvings: usize,
    mut attempt: impl FnMut(f64) -> Option<R>,
) -> Option<(f64, R)> {
    let mut eta = initial;
    for _ in 0..=max_halvings {
        if let Some(out) = attempt(eta) {
            return Some((eta, out));
        }
        eta *= 0.5;
    }
    None
}
