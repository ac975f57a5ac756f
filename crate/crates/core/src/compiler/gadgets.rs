//! Small exact ReLU networks used as layer outputs.

use crate::formula::Comparator;
use crate::numeric::{integer, rational, Rational};
use crate::ssm::{Fnn, Layer, Node};

fn scalar_layer(nodes: &[(Rational, Rational)]) -> Layer {
    Layer {
        nodes: nodes
            .iter()
            .map(|(w, b)| Node::new(vec![w.clone()], b.clone()))
            .collect(),
    }
}

/// `relu(w1·relu(s1·x + b1) + w2·relu(s2·x + b2))`.
fn two_hinge(first: [(i64, i64); 2], second: [i64; 2]) -> Fnn {
    let l1 = scalar_layer(&first.map(|(w, b)| (integer(w), integer(b))));
    let l2 = Layer {
        nodes: vec![Node::new(second.iter().map(|&w| integer(w)).collect(), integer(0))],
    };
    Fnn::new(1, vec![l1, l2]).expect("gadget shapes are consistent")
}

/// Network on one input that is 1 on integers `n` with `n cmp b` and 0 on
/// all other integers.
pub fn comparator(cmp: Comparator, b: i64) -> Fnn {
    match cmp {
        Comparator::Eq => two_hinge([(1, 1 - b), (1, -b)], [1, -2]),
        Comparator::Ge => two_hinge([(1, 1 - b), (1, -b)], [1, -1]),
        Comparator::Le => two_hinge([(-1, b + 1), (-1, b)], [1, -1]),
        Comparator::Gt => comparator(Comparator::Ge, b + 1),
        Comparator::Lt => comparator(Comparator::Le, b - 1),
    }
}

/// `min(1, x)` on `x >= 0`, as `relu(relu(x) - relu(x - 1))`.
pub fn clamp01() -> Fnn {
    two_hinge([(1, 0), (1, -1)], [1, -1])
}

/// Breakpoints and slopes of the previous-bit decoder.
const DECODER_HINGES: [((i64, i64), i64); 6] = [
    ((1, 8), 8),
    ((1, 4), -8),
    ((1, 2), -2),
    ((1, 1), 2),
    ((9, 8), 8),
    ((5, 4), -8),
];

/// Recovers `a_{t-1}` from `h_t = h_{t-1}/4 + a_t`: maps `[0, 1/8]` and
/// `[1, 9/8]` to 0, `[1/4, 1/2]` and `[5/4, 3/2]` to 1, linear in between.
pub fn prev_decoder() -> Fnn {
    let l1 = scalar_layer(&DECODER_HINGES.map(|((n, d), _)| (integer(1), -rational(n, d))));
    let l2 = Layer {
        nodes: vec![Node::new(
            DECODER_HINGES.iter().map(|&(_, s)| integer(s)).collect(),
            integer(0),
        )],
    };
    Fnn::new(1, vec![l1, l2]).expect("gadget shapes are consistent")
}

/// Encoder intervals `(a_t, a_{t-1}) -> [lo, hi]` that the decoder
/// separates.
pub fn encoder_intervals() -> [((bool, bool), (Rational, Rational)); 4] {
    [
        ((false, false), (integer(0), rational(1, 8))),
        ((false, true), (rational(1, 4), rational(1, 2))),
        ((true, false), (integer(1), rational(9, 8))),
        ((true, true), (rational(5, 4), rational(3, 2))),
    ]
}

/// `relu(x)`, used to copy a nonnegative coordinate.
pub fn copy() -> Fnn {
    Fnn::new(1, vec![scalar_layer(&[(integer(1), integer(0))])]).expect("gadget shapes are consistent")
}
