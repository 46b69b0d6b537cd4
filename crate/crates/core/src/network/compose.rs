use rayon::prelude::*;

use super::parallel::{parallel_compose, parallel_identical, ParallelRoute};
use super::serial::{serial_compose, serial_identical};
use super::{BranchChannel, BranchSpec, ParallelBundle, VertexParams};
use crate::error::{Error, Result};
use crate::transfer::TransferMatrix;

/// Recursive network description.
#[derive(Clone, Debug, PartialEq)]
pub enum NetworkNode {
    Leaf(TransferMatrix),
    /// Children in spatial order, leftmost first.
    Serial(Vec<NetworkNode>),
    SerialRepeat { cell: Box<NetworkNode>, count: usize },
    /// `count` identical copies of `cell` between contact-free junctions.
    ParallelRepeat { cell: Box<NetworkNode>, count: usize },
    Parallel(ParallelNode),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParallelBranch {
    pub node: NetworkNode,
    pub channel: BranchChannel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParallelNode {
    pub branches: Vec<ParallelBranch>,
    pub vertex_in: VertexParams,
    pub vertex_out: VertexParams,
    /// 0-based reference branch.
    pub reference: usize,
}

impl NetworkNode {
    pub fn leaf(m: TransferMatrix) -> Self {
        NetworkNode::Leaf(m)
    }

    pub fn repeat(cell: NetworkNode, count: usize) -> Self {
        NetworkNode::SerialRepeat { cell: Box::new(cell), count }
    }

    pub fn parallel_repeat(cell: NetworkNode, count: usize) -> Self {
        NetworkNode::ParallelRepeat { cell: Box::new(cell), count }
    }
}

/// Result of [`compose`]: the effective matrix and how many parallel
/// bundles had to be rebuilt by the dense solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Composition {
    pub matrix: TransferMatrix,
    pub fallbacks: usize,
}

pub fn compose(root: &NetworkNode) -> Result<Composition> {
    compose_at(root, "")
}

fn compose_at(node: &NetworkNode, path: &str) -> Result<Composition> {
    match node {
        NetworkNode::Leaf(m) => Ok(Composition { matrix: *m, fallbacks: 0 }),
        NetworkNode::Serial(children) => {
            if children.is_empty() {
                return Err(Error::InvalidParameter("empty serial chain".into()).at(path));
            }
            let mut mats = Vec::with_capacity(children.len());
            let mut fallbacks = 0;
            for (i, child) in children.iter().enumerate() {
                let c = compose_at(child, &format!("{path}/children/{i}"))?;
                fallbacks += c.fallbacks;
                mats.push(c.matrix);
            }
            let matrix = serial_compose(&mats).map_err(|e| e.at(path))?;
            Ok(Composition { matrix, fallbacks })
        }
        NetworkNode::SerialRepeat { cell, count } => {
            let c = compose_at(cell, &format!("{path}/cell"))?;
            let matrix = serial_identical(&c.matrix, *count).map_err(|e| e.at(path))?;
            Ok(Composition { matrix, fallbacks: c.fallbacks })
        }
        NetworkNode::ParallelRepeat { cell, count } => {
            let c = compose_at(cell, &format!("{path}/cell"))?;
            let matrix = parallel_identical(&c.matrix, *count).map_err(|e| e.at(path))?;
            Ok(Composition { matrix, fallbacks: c.fallbacks })
        }
        NetworkNode::Parallel(p) => {
            if p.branches.is_empty() {
                return Err(Error::InvalidParameter("parallel node without branches".into()).at(path));
            }
            // Branches are independent; collect keeps index order.
            let parts: Vec<Composition> = p
                .branches
                .par_iter()
                .enumerate()
                .map(|(i, b)| compose_at(&b.node, &format!("{path}/branches/{i}")))
                .collect::<Result<_>>()?;
            let bundle = ParallelBundle {
                branches: parts
                    .iter()
                    .zip(&p.branches)
                    .map(|(c, b)| BranchSpec::new(c.matrix, b.channel))
                    .collect(),
                vertex_in: p.vertex_in,
                vertex_out: p.vertex_out,
                reference: p.reference,
            };
            let out = parallel_compose(&bundle).map_err(|e| e.at(path))?;
            let nested: usize = parts.iter().map(|c| c.fallbacks).sum();
            let own = usize::from(out.route == ParallelRoute::OracleFallback);
            Ok(Composition { matrix: out.matrix, fallbacks: nested + own })
        }
    }
}
