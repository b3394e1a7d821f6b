//! Web service and command-line front end for the student annual review
//! system: sessions, the role-checked HTTP API, dataset download and the
//! success-prediction model endpoints.

pub mod api;
pub mod cli;
pub mod config;
pub mod error;
pub mod session;

pub use api::{router, router_with_static, AppState, Endpoint, ENDPOINTS};
pub use error::ApiError;
pub use session::{Session, SessionManager};
