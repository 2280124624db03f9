use std::ops::Range;

/// Index arithmetic for a loop-free layered MPP.
///
/// States are numbered layer by layer, so layer `k` owns a contiguous range.
/// Quadruples `(x, ω, a, x′)` exist only for `x` in layer `k < L` and `x′` in
/// layer `k + 1`; they are numbered state by state, then `ω`, `a`, `x′`.
/// Triples `(x, ω, a)` and pairs `(x, ω)` are numbered over the non-terminal
/// states in the same order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    layers: Vec<Range<usize>>,
    layer_of: Vec<usize>,
    outcomes: usize,
    actions: usize,
    quad_base: Vec<usize>,
    quads: Vec<(usize, usize, usize, usize)>,
}

impl Layout {
    /// `layer_sizes[k] = |X_k|`; the first and last layers must be singletons.
    pub fn new(layer_sizes: &[usize], outcomes: usize, actions: usize) -> Self {
        let mut layers = Vec::with_capacity(layer_sizes.len());
        let mut layer_of = Vec::new();
        let mut start = 0;
        for (k, &n) in layer_sizes.iter().enumerate() {
            layers.push(start..start + n);
            layer_of.extend(std::iter::repeat(k).take(n));
            start += n;
        }
        let mut quad_base = vec![0; start];
        let mut quads = Vec::new();
        for x in 0..start {
            quad_base[x] = quads.len();
            let k = layer_of[x];
            if k + 1 >= layers.len() {
                continue;
            }
            for w in 0..outcomes {
                for a in 0..actions {
                    for y in layers[k + 1].clone() {
                        quads.push((x, w, a, y));
                    }
                }
            }
        }
        Self {
            layers,
            layer_of,
            outcomes,
            actions,
            quad_base,
            quads,
        }
    }

    /// Number of layer transitions `L`.
    pub fn horizon(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn states(&self) -> usize {
        self.layer_of.len()
    }

    /// Non-terminal states, which are exactly `0..decision_states()`.
    pub fn decision_states(&self) -> usize {
        self.layers[self.horizon()].start
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn layer(&self, k: usize) -> Range<usize> {
        self.layers[k].clone()
    }

    pub fn layer_of(&self, x: usize) -> usize {
        self.layer_of[x]
    }

    /// States of the layer after `x`'s.
    pub fn successors(&self, x: usize) -> Range<usize> {
        self.layers[self.layer_of[x] + 1].clone()
    }

    pub fn quads(&self) -> &[(usize, usize, usize, usize)] {
        &self.quads
    }

    pub fn num_quads(&self) -> usize {
        self.quads.len()
    }

    pub fn quad(&self, x: usize, w: usize, a: usize, y: usize) -> usize {
        let succ = self.successors(x);
        self.quad_base[x] + (w * self.actions + a) * succ.len() + (y - succ.start)
    }

    /// Quadruple indices `(x, ω, a, ·)` over all successors.
    pub fn quads_of(&self, x: usize, w: usize, a: usize) -> Range<usize> {
        let n = self.successors(x).len();
        let s = self.quad_base[x] + (w * self.actions + a) * n;
        s..s + n
    }

    pub fn num_triples(&self) -> usize {
        self.decision_states() * self.outcomes * self.actions
    }

    pub fn triple(&self, x: usize, w: usize, a: usize) -> usize {
        (x * self.outcomes + w) * self.actions + a
    }

    pub fn num_pairs(&self) -> usize {
        self.decision_states() * self.outcomes
    }

    pub fn pair(&self, x: usize, w: usize) -> usize {
        x * self.outcomes + w
    }

    /// All decision triples in index order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (o, a) = (self.outcomes, self.actions);
        (0..self.decision_states()).flat_map(move |x| (0..o).flat_map(move |w| (0..a).map(move |b| (x, w, b))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_round_trip() {
        let l = Layout::new(&[1, 2, 1], 2, 3);
        assert_eq!(l.horizon(), 2);
        assert_eq!(l.states(), 4);
        assert_eq!(l.decision_states(), 3);
        assert_eq!(l.num_quads(), 2 * 3 * 2 + 2 * 2 * 3);
        for (i, &(x, w, a, y)) in l.quads().iter().enumerate() {
            assert_eq!(l.quad(x, w, a, y), i);
            assert!(l.quads_of(x, w, a).contains(&i));
        }
        assert_eq!(l.triples().count(), l.num_triples());
        for (i, (x, w, a)) in l.triples().enumerate() {
            assert_eq!(l.triple(x, w, a), i);
        }
    }
}
