use super::{Direction, Instance, TimeWindow};
use crate::error::{Error, Result};

/// Derives each request's unspecified window from the specified one.
///
/// Inbound requests keep their pickup window and get
/// `[e+ + s + t, l+ + s + L]` at the drop-off; outbound requests keep their
/// drop-off window and get `[e- - L - s, l- - t - s]` at the pickup. Requests
/// without a direction are classified first: inbound iff the pickup window
/// is no wider than the drop-off window. Both windows end up clipped to the
/// depot window. Applying this twice gives the same instance.
pub fn tighten_time_windows(inst: &Instance) -> Result<Instance> {
    let horizon = inst.depot.window;
    let mut out = inst.clone();
    for r in out.requests.iter_mut() {
        let (t, s, ride) = (r.direct_time, r.service, r.max_ride);
        let direction = match r.direction {
            Some(d) => d,
            None => {
                let (p, d) = (r.pickup.window, r.dropoff.window);
                if p.covers(&horizon) && d.covers(&horizon) {
                    return Err(Error::Tightening {
                        request: r.id,
                        msg: "both windows span the whole horizon, cannot tell inbound from outbound".into(),
                    });
                }
                if p.width() <= d.width() {
                    Direction::Inbound
                } else {
                    Direction::Outbound
                }
            }
        };
        let empty = |what: &str, w: TimeWindow| Error::Tightening {
            request: r.id,
            msg: format!("{what} window [{}, {}] is empty after clipping to the horizon", w.earliest, w.latest),
        };
        match direction {
            Direction::Inbound => {
                let given = r.pickup.window.clip(&horizon);
                if given.is_empty() {
                    return Err(empty("pickup", given));
                }
                let derived = TimeWindow::new(given.earliest + s + t, given.latest + s + ride).clip(&horizon);
                if derived.is_empty() {
                    return Err(empty("drop-off", derived));
                }
                r.pickup.window = given;
                r.dropoff.window = derived;
            }
            Direction::Outbound => {
                let given = r.dropoff.window.clip(&horizon);
                if given.is_empty() {
                    return Err(empty("drop-off", given));
                }
                let derived = TimeWindow::new(given.earliest - ride - s, given.latest - t - s).clip(&horizon);
                if derived.is_empty() {
                    return Err(empty("pickup", derived));
                }
                r.dropoff.window = given;
                r.pickup.window = derived;
            }
        }
        r.direction = Some(direction);
    }
    Ok(out)
}
