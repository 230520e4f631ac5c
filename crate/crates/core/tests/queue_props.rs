use proptest::prelude::*;
use satqos::aoi::{departure_times, peak_aoi, simulate_trace, sojourn_times};
use satqos::{ArrivalModel, ServiceModel};

fn trace_columns() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..80).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..50.0, n),
            prop::collection::vec(0.001f64..40.0, n),
        )
            .prop_map(|(gaps, services)| {
                let mut a = vec![0.0];
                let mut s = vec![0.0];
                for (g, x) in gaps.into_iter().zip(services) {
                    a.push(a.last().unwrap() + g);
                    s.push(x);
                }
                (a, s)
            })
    })
}

proptest! {
    #[test]
    fn fcfs_order_and_work_conservation((a, s) in trace_columns()) {
        let d = departure_times(&a, &s);
        let n = a.len() - 1;
        for u in 2..=n {
            prop_assert!(d[u] > d[u - 1]);
        }
        let work: f64 = s[1..].iter().sum();
        prop_assert!(work <= d[n] - a[1] + s[1] + 1e-9 * d[n].abs().max(1.0));
    }

    #[test]
    fn peak_aoi_decomposes((a, s) in trace_columns()) {
        let d = departure_times(&a, &s);
        let t = sojourn_times(&a, &d);
        let p = peak_aoi(&a, &t);
        for u in 1..a.len() {
            prop_assert_eq!(p[u], (a[u] - a[u - 1]) + (d[u] - a[u]));
        }
    }
}

#[test]
fn simulated_trace_columns_are_consistent() {
    let am = ArrivalModel::Poisson { rate: 1e-2 };
    let sm = ServiceModel::Arq { n: 50, epsilon: 0.2 };
    let t = simulate_trace(&am, &sm, 2000, 4).unwrap();
    assert_eq!(t.departures, departure_times(&t.arrivals, &t.services));
    for u in 1..=t.len() {
        assert_eq!(t.peak_aoi[u], t.arrivals[u] - t.arrivals[u - 1] + t.sojourns[u]);
        assert_eq!(t.services[u] % 50.0, 0.0);
    }
}
