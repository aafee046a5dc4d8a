//! Direct evaluation of the Lagrangian `I(X;A) + I(X;T|Y,A) − sD − mC` over
//! Shannon strategies, and a grid-based minimizer for tiny instances.

use rand::Rng;

/// A problem instance in plain tables.
#[derive(Clone, Debug)]
pub struct Instance {
    pub px: Vec<f64>,
    /// `channel[a][x][y]`
    pub channel: Vec<Vec<Vec<f64>>>,
    /// `distortion[x][xhat]`
    pub distortion: Vec<Vec<f64>>,
    pub cost: Vec<f64>,
}

impl Instance {
    pub fn nx(&self) -> usize {
        self.px.len()
    }

    pub fn na(&self) -> usize {
        self.channel.len()
    }

    pub fn ny(&self) -> usize {
        self.channel[0][0].len()
    }

    pub fn nxh(&self) -> usize {
        self.distortion[0].len()
    }

    /// Every `(recon, action)` pair; recon vectors count up with the last
    /// `y` varying fastest, actions outermost.
    pub fn strategies(&self) -> Vec<(Vec<usize>, usize)> {
        let (ny, nxh) = (self.ny(), self.nxh());
        let per_action = nxh.pow(ny as u32);
        let mut out = Vec::new();
        for a in 0..self.na() {
            for mut code in 0..per_action {
                let mut recon = vec![0; ny];
                for y in (0..ny).rev() {
                    recon[y] = code % nxh;
                    code /= nxh;
                }
                out.push((recon, a));
            }
        }
        out
    }

    /// `(rate, distortion, cost)` of `ptx[x][t]` over `strategies`.
    pub fn evaluate(&self, strategies: &[(Vec<usize>, usize)], ptx: &[Vec<f64>]) -> (f64, f64, f64) {
        let (nx, na, ny, nt) = (self.nx(), self.na(), self.ny(), strategies.len());
        let mut pxa = vec![vec![0.0; na]; nx];
        let mut pxyt = vec![vec![vec![0.0; nt]; ny]; nx];
        let mut distortion = 0.0;
        for x in 0..nx {
            for (t, (recon, a)) in strategies.iter().enumerate() {
                let w = self.px[x] * ptx[x][t];
                pxa[x][*a] += w;
                for y in 0..ny {
                    let v = w * self.channel[*a][x][y];
                    pxyt[x][y][t] = v;
                    distortion += v * self.distortion[x][recon[y]];
                }
            }
        }
        let pa: Vec<f64> = (0..na).map(|a| (0..nx).map(|x| pxa[x][a]).sum()).collect();
        let cost: f64 = pa.iter().zip(&self.cost).map(|(p, c)| p * c).sum();
        let mut i_xa = 0.0;
        for x in 0..nx {
            for a in 0..na {
                let v = pxa[x][a];
                if v > 0.0 {
                    i_xa += v * (v / (self.px[x] * pa[a])).log2();
                }
            }
        }
        // I(X;T|Y,A) = Σ p(x,y,t) log p(x,y,t) p(y,a) / (p(x,y,a) p(y,t)), a = a(t)
        let mut pxya = vec![vec![vec![0.0; na]; ny]; nx];
        let mut pyt = vec![vec![0.0; nt]; ny];
        let mut pya = vec![vec![0.0; na]; ny];
        for x in 0..nx {
            for y in 0..ny {
                for (t, (_, a)) in strategies.iter().enumerate() {
                    let v = pxyt[x][y][t];
                    pxya[x][y][*a] += v;
                    pyt[y][t] += v;
                    pya[y][*a] += v;
                }
            }
        }
        let mut i_cond = 0.0;
        for x in 0..nx {
            for y in 0..ny {
                for (t, (_, a)) in strategies.iter().enumerate() {
                    let v = pxyt[x][y][t];
                    if v > 0.0 {
                        i_cond += v * ((v * pya[y][*a]) / (pxya[x][y][*a] * pyt[y][t])).log2();
                    }
                }
            }
        }
        ((i_xa + i_cond).max(0.0), distortion, cost)
    }
}

/// Outcome of [`Instance::brute_minimize`].
#[derive(Clone, Debug)]
pub struct BruteResult {
    /// Minimum of `R − sD − mC`.
    pub value: f64,
    pub rate: f64,
    pub distortion: f64,
    pub cost: f64,
    pub ptx: Vec<Vec<f64>>,
}

/// Step sizes for the pairwise mass transfers: the coarse `0.02` grid, the
/// `0.002` refinement, then finer polishing steps.
const STEPS: [f64; 5] = [0.02, 0.002, 2e-4, 2e-5, 2e-6];
/// Transfers tried on each side of the current split after the first level.
const LOCAL_REACH: i64 = 10;

impl Instance {
    /// Minimizes `R − sD − mC` over `P_{T|X}` by exhaustive grid search along
    /// every pair of strategies in every row, repeated until no transfer
    /// helps, first on a `0.02` grid over the whole pair mass and then on
    /// successively finer grids around the incumbent. The objective is convex
    /// in `P_{T|X}`, so pairwise stationarity is global optimality up to the
    /// final grid resolution.
    pub fn brute_minimize(&self, s: f64, m: f64) -> BruteResult {
        let strategies = self.strategies();
        let nt = strategies.len();
        let objective = |ptx: &[Vec<f64>]| {
            let (r, d, c) = self.evaluate(&strategies, ptx);
            r - s * d - m * c
        };
        let mut ptx = vec![vec![1.0 / nt as f64; nt]; self.nx()];
        let mut best = objective(&ptx);
        for (level, &step) in STEPS.iter().enumerate() {
            loop {
                let before = best;
                for x in 0..self.nx() {
                    if self.px[x] == 0.0 {
                        continue;
                    }
                    for i in 0..nt {
                        for j in i + 1..nt {
                            let total = ptx[x][i] + ptx[x][j];
                            if total <= 0.0 {
                                continue;
                            }
                            let current = ptx[x][i];
                            let candidates: Vec<f64> = if level == 0 {
                                let n = (total / step).floor() as i64;
                                (0..=n).map(|k| k as f64 * step).chain([total]).collect()
                            } else {
                                (-LOCAL_REACH..=LOCAL_REACH)
                                    .map(|k| current + k as f64 * step)
                                    .filter(|&v| (0.0..=total).contains(&v))
                                    .chain([0.0, total])
                                    .collect()
                            };
                            let mut choice = current;
                            for v in candidates {
                                ptx[x][i] = v;
                                ptx[x][j] = (total - v).max(0.0);
                                let f = objective(&ptx);
                                if f < best - 1e-15 {
                                    best = f;
                                    choice = v;
                                }
                            }
                            ptx[x][i] = choice;
                            ptx[x][j] = (total - choice).max(0.0);
                        }
                    }
                }
                if before - best < 1e-13 {
                    break;
                }
            }
        }
        let (rate, distortion, cost) = self.evaluate(&strategies, &ptx);
        BruteResult {
            value: best,
            rate,
            distortion,
            cost,
            ptx,
        }
    }

    /// `α_{t,x}` for the strategy `(recon, a)` by the product form
    /// `Q_A(a) 2^{mΔ(a)} Π_y (2^{s d(x, recon(y))} Q_{T,Y}(t,y))^{P(y|x,a)}`,
    /// with `qty_row[y] = Q_{T,Y}(t,y)`.
    pub fn alpha_direct(&self, recon: &[usize], a: usize, x: usize, qa: &[f64], qty_row: &[f64], s: f64, m: f64) -> f64 {
        let mut v = qa[a] * 2f64.powf(m * self.cost[a]);
        for (y, &p) in self.channel[a][x].iter().enumerate() {
            if p > 0.0 {
                v *= (2f64.powf(s * self.distortion[x][recon[y]]) * qty_row[y]).powf(p);
            }
        }
        v
    }
}

fn random_pmf<R: Rng>(rng: &mut R, n: usize, floor: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| floor + rng.gen::<f64>()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Random instance with strictly positive source and channel, a zero on the
/// diagonal of the distortion table, and action 0 free.
pub fn random_instance<R: Rng>(rng: &mut R, nx: usize, na: usize, ny: usize, nxh: usize) -> Instance {
    let px = random_pmf(rng, nx, 0.2);
    let channel = (0..na)
        .map(|_| (0..nx).map(|_| random_pmf(rng, ny, 0.05)).collect())
        .collect();
    let distortion = (0..nx)
        .map(|x| {
            (0..nxh)
                .map(|xh| if xh == x % nxh { 0.0 } else { 0.2 + rng.gen::<f64>() })
                .collect()
        })
        .collect();
    let mut cost = vec![0.0];
    cost.extend((1..na).map(|_| 0.2 + rng.gen::<f64>()));
    Instance {
        px,
        channel,
        distortion,
        cost,
    }
}
