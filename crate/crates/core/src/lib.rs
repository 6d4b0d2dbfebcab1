//! Service-oriented communities, fractal social organizations, and the
//! knowledge-diffusion experiments used to compare organization topologies.
//!
//! - [`taxonomy`]: service-type subsumption.
//! - [`descriptions`]: the Turtle-subset service description format.
//! - [`mutualism`]: action systems and mutualistic preconditions.
//! - [`community`]: publish-subscribe matching inside one community.
//! - [`fractal`]: nested communities, exception escalation, overlay teams.
//! - [`diffusion`]: agent-based knowledge diffusion under member isolation.

pub mod community;
pub mod descriptions;
pub mod diffusion;
pub mod fractal;
pub mod mutualism;
pub mod taxonomy;

pub use descriptions::{
    parse_descriptions, serialize_description, DescriptionError, LocationSpec, Role,
    ServiceDescription, ValidationError,
};
pub use taxonomy::{parse_taxonomy, Taxonomy, TaxonomyError};
