//! Local annotation service: lists real images, stores human-drawn polygon
//! masks and exports them as an evaluation-ready dataset manifest.

mod http;
mod session;

pub use http::{router, serve, ServeConfig};
pub use session::{
    AnnotationSession, AnnotationState, ImageEntry, PolygonDocument, SessionError, StoredAnnotation,
};
