//! Mock slicing controller: tenants, slices and the REST API whose slice
//! documents are the audited resources.

pub mod controller;
pub mod http;
pub mod model;
pub mod source;

pub use controller::{ControllerError, SlicingController};
pub use http::{controller_router, router};
pub use model::{
    is_valid_slice_id, is_valid_tenant_id, PathError, SliceConfig, SliceDocument, SlicePath, Tenant, Wtp, API_PREFIX,
};
pub use source::{ControllerApi, FetchError, HttpController, LocalSliceApi, SliceSource, TamperingSource};
