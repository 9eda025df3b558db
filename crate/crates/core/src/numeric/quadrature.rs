/// Composite Simpson rule on `[a, b]` with `intervals` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut odd = super::CompensatedSum::new();
    let mut even = super::CompensatedSum::new();
    for i in 1..n {
        let x = a + i as f64 * h;
        if i % 2 == 1 {
            odd.add(f(x));
        } else {
            even.add(f(x));
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd.value() + 2.0 * even.value())
}
