//! Streett objectives on graphs and Markov decision processes.
//!
//! The crate computes winning sets for k-pair Streett (strong fairness)
//! objectives: on graphs by repeatedly peeling bad vertices off strongly
//! connected components, on MDPs by doing the same inside maximal end
//! components and finishing with almost-sure reachability. Both rely on
//! decremental data structures ([`dec_scc::DecSccEngine`] and
//! [`dec_mec::DecMec`]) so that each edge is deleted at most once.
//!
//! Slow but simple reference implementations live in [`oracles`].

pub mod dec_mec;
pub mod dec_scc;
pub mod format;
pub mod generate;
pub mod graph;
pub mod graph_streett;
pub mod mdp_streett;
pub mod mec;
pub mod model;
pub mod oracles;
pub mod streett_ds;

pub use dec_scc::{DecSccEngine, DecSccError, SccHandle};
pub use dec_mec::{DecMec, DecMecError};
pub use format::{parse_instance, write_instance, ParseError};
pub use graph::{condense, graph_reach, random_attractor, split_vertices, tarjan_sccs};
pub use model::{Edge, Instance, MdpModel, Owner, StreettPair, StreettSpec, Vertex, VertexSet};
pub use graph_streett::{solve_graph, winning_set_graph, StreettError};
pub use mdp_streett::{solve_mdp, winning_set_mdp};
pub use mec::{asw_reach, mec_decomposition, MecDecomposition};
