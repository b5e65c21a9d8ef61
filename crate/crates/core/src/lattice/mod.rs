//! Half-space stochastic six-vertex model and the deformed-boson row weights.

pub mod boson;
pub mod sixvertex;

pub use boson::{
    boson_row_weight, boson_vertex, boundary_vertex_weight, verify_boundary_exchange,
    verify_row_is_skew_hl, verify_yb_exchange, BosonRowState, ExchangeFailure, ExchangeReport,
    Palette, RowCheckReport,
};
pub use sixvertex::{
    bulk_weight, enumerate_sixvertex, sample_heights, sample_sixvertex, HeightSample,
    SixVertexConfig, SixVertexWeights, MAX_ENUMERATE_N,
};
