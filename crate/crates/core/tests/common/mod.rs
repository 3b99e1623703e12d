use num_rational::Ratio;

/// Midpoint weights from the Vandermonde system on nodes `2i - (2N+1)`.
pub fn vandermonde_weights(n: usize) -> Vec<Ratio<i128>> {
    let m = 2 * n + 2;
    let nodes: Vec<i128> = (0..m as i128).map(|i| 2 * i - (2 * n as i128 + 1)).collect();
    let mut a: Vec<Vec<Ratio<i128>>> = (0..m)
        .map(|p| {
            let mut row: Vec<Ratio<i128>> = nodes.iter().map(|&x| Ratio::from_integer(x.pow(p as u32))).collect();
            row.push(Ratio::from_integer(if p == 0 { 1 } else { 0 }));
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| a[r][col] != Ratio::from_integer(0)).unwrap();
        a.swap(col, pivot);
        let inv = Ratio::from_integer(1) / a[col][col];
        for c in col..=m {
            a[col][c] = a[col][c] * inv;
        }
        for r in 0..m {
            if r != col {
                let factor = a[r][col];
                for c in col..=m {
                    let sub = factor * a[col][c];
                    a[r][c] = a[r][c] - sub;
                }
            }
        }
    }
    a.iter().map(|row| row[m]).collect()
}
