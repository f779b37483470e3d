//! Annotation queue with session leases, report search and export, and the
//! HTTP routes the annotation UI talks to.

mod clock;
mod http;
mod service;

pub use clock::{Clock, ManualClock, SystemClock};
pub use http::{router, SESSION_HEADER, TOKEN_HEADER};
pub use service::{
    label_name, numeric_query, Ack, AnnotationService, LeasedTask, Progress, ReportEntry, SearchHit, SearchMatch,
    ServiceError, TaskStatus,
};
