//! Random forest of unpruned Gini trees over bootstrap samples.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features per split; `None` means `floor(sqrt(n_features))`.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn vote(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomForest {
    mean: Vec<f64>,
    scale: Vec<f64>,
    trees: Vec<Tree>,
}

struct Builder<'a, R: Rng + ?Sized> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    mtry: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

impl<R: Rng + ?Sized> Builder<'_, R> {
    /// Grows the subtree for `samples` and returns its node index.
    fn grow(&mut self, samples: &mut [usize]) -> usize {
        let n = samples.len();
        let pos = samples.iter().filter(|&&i| self.y[i]).count();
        let slot = self.nodes.len();
        if pos == 0 || pos == n {
            self.nodes.push(Node::Leaf(if pos == n { 1.0 } else { 0.0 }));
            return slot;
        }
        match self.best_split(samples, pos) {
            None => {
                let v = match (2 * pos).cmp(&n) {
                    std::cmp::Ordering::Greater => 1.0,
                    std::cmp::Ordering::Equal => 0.5,
                    std::cmp::Ordering::Less => 0.0,
                };
                self.nodes.push(Node::Leaf(v));
                slot
            }
            Some((feature, threshold)) => {
                self.nodes.push(Node::Leaf(0.0));
                let x = self.x;
                let mut cut = 0;
                for k in 0..n {
                    if x[samples[k]][feature] <= threshold {
                        samples.swap(k, cut);
                        cut += 1;
                    }
                }
                let (l, r) = samples.split_at_mut(cut);
                let left = self.grow(l);
                let right = self.grow(r);
                self.nodes[slot] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                slot
            }
        }
    }

    /// Best Gini split over `mtry` randomly drawn features. Features that
    /// are constant within the node do not count towards `mtry`.
    fn best_split(&mut self, samples: &[usize], pos: usize) -> Option<(usize, f64)> {
        let n = samples.len();
        let n_features = self.x[0].len();
        let mut features: Vec<usize> = (0..n_features).collect();
        features.shuffle(self.rng);
        let parent = gini(pos, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut tried = 0;
        let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);
        for &f in &features {
            if tried == self.mtry {
                break;
            }
            column.clear();
            column.extend(samples.iter().map(|&i| (self.x[i][f], self.y[i])));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            if column[0].0 == column[n - 1].0 {
                continue;
            }
            tried += 1;
            let mut left_pos = 0;
            for k in 0..n - 1 {
                if column[k].1 {
                    left_pos += 1;
                }
                if column[k].0 == column[k + 1].0 {
                    continue;
                }
                let nl = k + 1;
                let nr = n - nl;
                let impurity =
                    (nl as f64 * gini(left_pos, nl) + nr as f64 * gini(pos - left_pos, nr)) / n as f64;
                if impurity < parent && best.is_none_or(|(b, _, _)| impurity < b) {
                    let threshold = column[k].0 + (column[k + 1].0 - column[k].0) / 2.0;
                    best = Some((impurity, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl RandomForest {
    /// Trains on rows `x` (all the same length) with labels `y`.
    pub fn fit<R: Rng + ?Sized>(x: &[Vec<f64>], y: &[bool], cfg: &ForestConfig, rng: &mut R) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::invalid("forest needs as many labels as rows, and at least one row"));
        }
        if y.iter().all(|&l| l) || y.iter().all(|&l| !l) {
            return Err(Error::SingleClass);
        }
        let d = x[0].len();
        if d == 0 || x.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("feature rows must share a non-zero length"));
        }
        if cfg.n_trees == 0 {
            return Err(Error::invalid("forest needs at least one tree"));
        }
        let n = x.len();
        let mean: Vec<f64> = (0..d).map(|f| x.iter().map(|r| r[f]).sum::<f64>() / n as f64).collect();
        let scale: Vec<f64> = (0..d)
            .map(|f| {
                let var = x.iter().map(|r| (r[f] - mean[f]).powi(2)).sum::<f64>() / n as f64;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let z: Vec<Vec<f64>> = x.iter().map(|r| standardize(r, &mean, &scale)).collect();
        let mtry = cfg
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
            .clamp(1, d);
        let mut trees = Vec::with_capacity(cfg.n_trees);
        for _ in 0..cfg.n_trees {
            let mut samples: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut builder = Builder {
                x: &z,
                y,
                mtry,
                rng: &mut *rng,
                nodes: Vec::new(),
            };
            builder.grow(&mut samples);
            trees.push(Tree { nodes: builder.nodes });
        }
        Ok(Self { mean, scale, trees })
    }

    /// Fraction of trees voting for the positive class.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z = standardize(x, &self.mean, &self.scale);
        self.trees.iter().map(|t| t.vote(&z)).sum::<f64>() / self.trees.len() as f64
    }
}

fn standardize(row: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    row.iter().zip(mean).zip(scale).map(|((v, m), s)| (v - m) / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::RandomStream;
    use crate::mia::auc::auc;

    fn noisy_rows(n: usize, d: usize, rng: &mut RandomStream) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
    }

    #[test]
    fn separable_feature_is_learned() {
        let mut rng = RandomStream::from_seed(1);
        let mut x = noisy_rows(40, 10, &mut rng);
        let y: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        for (r, &l) in x.iter_mut().zip(&y) {
            r[0] = if l { 1.0 } else { 0.0 };
        }
        let f = RandomForest::fit(&x, &y, &ForestConfig::default(), &mut rng).unwrap();
        let mut test = noisy_rows(20, 10, &mut rng);
        let labels: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        for (r, &l) in test.iter_mut().zip(&labels) {
            r[0] = if l { 1.0 } else { 0.0 };
        }
        let correct = test
            .iter()
            .zip(&labels)
            .filter(|(r, &l)| (f.predict(r) > 0.5) == l)
            .count();
        assert_eq!(correct, 20);
    }

    #[test]
    fn shuffled_labels_give_chance_auc() {
        let mut total = 0.0;
        for seed in 0..10 {
            let mut rng = RandomStream::from_seed(seed);
            let x = noisy_rows(100, 5, &mut rng);
            let y: Vec<bool> = (0..100).map(|_| rng.gen()).collect();
            let f = RandomForest::fit(&x[..50], &y[..50], &ForestConfig::default(), &mut rng).unwrap();
            let scores: Vec<f64> = x[50..].iter().map(|r| f.predict(r)).collect();
            total += auc(&scores, &y[50..]).unwrap();
        }
        assert!((total / 10.0 - 0.5).abs() < 0.1, "mean auc {}", total / 10.0);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let mut rng = RandomStream::from_seed(5);
        let x = noisy_rows(30, 4, &mut rng);
        let y: Vec<bool> = (0..30).map(|i| x[i][1] > 0.5).collect();
        let a = RandomForest::fit(&x, &y, &ForestConfig::default(), &mut RandomStream::from_seed(9)).unwrap();
        let b = RandomForest::fit(&x, &y, &ForestConfig::default(), &mut RandomStream::from_seed(9)).unwrap();
        for r in &x {
            assert_eq!(a.predict(r), b.predict(r));
        }
    }

    #[test]
    fn single_class_is_an_error() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            RandomForest::fit(&x, &[true, true], &ForestConfig::default(), &mut RandomStream::from_seed(0)),
            Err(Error::SingleClass)
        ));
    }
}
