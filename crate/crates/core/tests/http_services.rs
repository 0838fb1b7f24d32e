//! Every service exercised over real localhost sockets.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::{json, Value};
use slice_integrity::adapters::{self, AdapterService, AuditorAdapter, IpfsPinAdapter, MemoryAuditLog};
use slice_integrity::clock::VirtualClock;
use slice_integrity::content_store::http::HttpObjectStore;
use slice_integrity::content_store::{self, cid_of, Cid, ContentStore, ObjectStore, StoreError};
use slice_integrity::harness::{snapshot_job, LocalStack};
use slice_integrity::ledger::http::HttpLedger;
use slice_integrity::ledger::{self, Ledger, LedgerClient, LedgerConfig, LedgerError, LocalLedger, Transaction};
use slice_integrity::net::{HttpClient, ServerHandle};
use slice_integrity::node::{self, MemoryCursor};
use slice_integrity::slicing::{self, ControllerApi, ControllerError, HttpController, LocalSliceApi, SliceSource, SlicingController};

const TID: &str = "f7257cce-d05e-4f43-a0a6-f19236948f2f";
const PATH: &str = "/api/v1/tenants/f7257cce-d05e-4f43-a0a6-f19236948f2f/slices/0x00";

fn raw(method: &str, url: &str, body: Option<&str>) -> (u16, String) {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(5)))
        .build()
        .into();
    let resp = match (method, body) {
        ("GET", _) => agent.get(url).call(),
        ("POST", b) => agent.post(url).header("content-type", "application/json").send(b.unwrap_or("")),
        ("PUT", b) => agent.put(url).header("content-type", "application/json").send(b.unwrap_or("")),
        _ => unreachable!(),
    };
    let mut resp = resp.unwrap();
    let status = resp.status().as_u16();
    (status, resp.body_mut().read_to_string().unwrap())
}

fn controller_server() -> (ServerHandle, LocalSliceApi) {
    let api = LocalSliceApi::new(Arc::new(SlicingController::new()));
    (ServerHandle::spawn_local(slicing::router(api.clone())).unwrap(), api)
}

#[test]
fn controller_rest_statuses() {
    let (server, _) = controller_server();
    let base = server.url();
    let tenants = format!("{base}/api/v1/tenants");
    let (s, body) = raw("POST", &tenants, Some(&json!({ "name": "tenant-a", "tenant_id": TID }).to_string()));
    assert_eq!(s, 201, "{body}");
    assert_eq!(raw("POST", &tenants, Some(&json!({ "name": "x", "tenant_id": TID }).to_string())).0, 409);
    assert_eq!(raw("POST", &tenants, Some("{not json")).0, 400);

    let slices = format!("{tenants}/{TID}/slices");
    let new_slice = json!({ "slice_id": "0x00", "quantum_ms": 100 }).to_string();
    assert_eq!(raw("POST", &slices, Some(&new_slice)).0, 201);
    assert_eq!(raw("POST", &slices, Some(&new_slice)).0, 409);
    assert_eq!(raw("POST", &slices, Some(r#"{"slice_id":"0x01","quantum_ms":0}"#)).0, 422);
    let missing = format!("{tenants}/00000000-0000-4000-8000-000000000000/slices");
    assert_eq!(raw("POST", &missing, Some(r#"{"slice_id":"0x01","quantum_ms":5}"#)).0, 404);

    let (s, first) = raw("GET", &format!("{base}{PATH}"), None);
    assert_eq!(s, 200);
    assert_eq!(first, format!(r#"{{"quantum_ms":100,"slice_id":"0x00","tenant_id":"{TID}","wtps":[]}}"#));
    assert_eq!(raw("GET", &format!("{base}{PATH}"), None).1, first);
    assert_eq!(raw("GET", &format!("{slices}/0x07"), None).0, 404);

    let quantum = format!("{base}{PATH}/quantum");
    assert_eq!(raw("PUT", &quantum, Some(r#"{"quantum_ms":0}"#)).0, 422);
    assert_eq!(raw("PUT", &quantum, Some(r#"{"quantum_ms":200}"#)).0, 200);
    let (_, after) = raw("GET", &format!("{base}{PATH}"), None);
    assert_ne!(cid_of(after.as_bytes()), cid_of(first.as_bytes()));
}

#[test]
fn remote_controller_client() {
    let (server, _) = controller_server();
    let remote = HttpController::new(server.url());
    remote.create_tenant("tenant-a", Some(TID)).unwrap();
    assert!(matches!(remote.create_tenant("again", Some(TID)), Err(ControllerError::Conflict(_))));
    remote.create_slice(TID, "0x00", 100, vec![]).unwrap();
    assert!(matches!(remote.create_slice(TID, "0x01", 0, vec![]), Err(ControllerError::Validation(_))));
    assert!(matches!(remote.update_quantum(TID, "0x09", 5), Err(ControllerError::NotFound(_))));
    let bytes = remote.fetch(PATH).unwrap();
    assert_eq!(remote.update_quantum(TID, "0x00", 300).unwrap().quantum_ms, 300);
    assert_ne!(remote.fetch(PATH).unwrap(), bytes);
    assert_eq!(remote.tenants().unwrap().len(), 1);
    server.shutdown();
    assert!(matches!(remote.fetch(PATH), Err(slicing::FetchError::Unavailable(_))));
}

#[test]
fn offline_controller_answers_503() {
    let (server, api) = controller_server();
    api.set_online(false);
    assert_eq!(raw("GET", &format!("{}{PATH}", server.url()), None).0, 503);
}

#[test]
fn content_store_over_http() {
    let store = Arc::new(ContentStore::with_capacity(64));
    let server = ServerHandle::spawn_local(content_store::http::router(store.clone())).unwrap();
    let remote = HttpObjectStore::new(server.url());
    let cid = remote.add(b"hello world", true).unwrap();
    assert_eq!(cid.as_str(), "QmaozNR7DZHQK1ZcU9p7QdrshMvXqWK6gpu5rmrkPdT3L4");
    assert_eq!(remote.get(&cid).unwrap(), b"hello world");
    assert_eq!(store.is_pinned(&cid), Some(true));
    let absent = Cid::of(b"absent");
    assert!(matches!(remote.get(&absent), Err(StoreError::NotFound(_))));
    assert!(remote.add(&[0u8; 100], false).is_err());
    assert_eq!(raw("GET", &format!("{}/objects/not-a-cid", server.url()), None).0, 400);
    assert_eq!(raw("POST", &format!("{}/objects/{cid}/unpin", server.url()), None).0, 200);
    let (_, gc) = raw("POST", &format!("{}/gc", server.url()), None);
    assert_eq!(serde_json::from_str::<Value>(&gc).unwrap()["removed"], 1);
    assert!(remote.list().unwrap().as_array().unwrap().is_empty());
}

#[test]
fn ledger_json_rpc() {
    let chain = LocalLedger::new(Ledger::standard(LedgerConfig::default()));
    let server = ServerHandle::spawn_local(ledger::http::router(chain.clone(), Duration::ZERO)).unwrap();
    let remote = HttpLedger::new(server.url());
    let treasury = remote.snapshot().unwrap().treasury;
    let alice = remote.create_eoa(1).unwrap();
    assert_eq!(alice.to_string(), "0xcbc30a03e9264d305e53ec0688e362773e9d24df");
    let receipt = remote.transfer(treasury, alice, 25).unwrap();
    assert!(receipt.is_success());
    assert_eq!(remote.get_account(&alice).unwrap().unwrap().balance_link, 25);
    let stale = remote.submit_transaction(Transaction::transfer(treasury, alice, 0, 1));
    assert!(matches!(stale, Err(LedgerError::BadNonce { expected: 1, got: 0, .. })));
    assert_eq!(remote.height().unwrap(), 1);
    assert_eq!(remote.snapshot().unwrap(), chain.snapshot().unwrap());
    let (s, body) = raw("POST", &server.url(), Some(r#"{"method":"nope"}"#));
    assert_eq!(s, 200);
    assert!(body.contains("error"));
    assert_eq!(raw("POST", &server.url(), Some("garbage")).0, 400);
}

#[test]
fn ledger_unreachable_is_an_error() {
    let server = ServerHandle::spawn_local(ledger::http::router(
        LocalLedger::new(Ledger::standard(LedgerConfig::default())),
        Duration::ZERO,
    ))
    .unwrap();
    let url = server.url();
    server.shutdown();
    assert!(matches!(HttpLedger::new(url).height(), Err(LedgerError::Unavailable { .. })));
}

struct AdapterFixture {
    controller: ServerHandle,
    adapters: ServerHandle,
    log: MemoryAuditLog,
    api: LocalSliceApi,
}

fn adapter_fixture() -> AdapterFixture {
    let (controller, api) = controller_server();
    api.controller().create_tenant_with_id(TID, "tenant-a").unwrap();
    api.controller().create_slice(TID, "0x00", 100, vec![]).unwrap();
    let slices = Arc::new(HttpController::new(controller.url()));
    let log = MemoryAuditLog::new();
    let service = AdapterService {
        pin: IpfsPinAdapter::new(slices.clone(), Arc::new(ContentStore::new())),
        auditor: AuditorAdapter::new(slices, Arc::new(log.clone()), Arc::new(VirtualClock::new())),
        log: Some(log.clone()),
    };
    let adapters = ServerHandle::spawn_local(adapters::router(service)).unwrap();
    AdapterFixture { controller, adapters, log, api }
}

#[test]
fn validate_endpoint_outcomes() {
    let f = adapter_fixture();
    let url = format!("{}/validate", f.adapters.url());
    let (s, pinned) = raw("POST", &format!("{}/pin", f.adapters.url()), Some(&json!({ "id": "1", "data": { "api_path": PATH } }).to_string()));
    assert_eq!(s, 200);
    let cid = serde_json::from_str::<Value>(&pinned).unwrap()["cid"].as_str().unwrap().to_string();
    let body = json!({ "id": "2", "data": { "api_path": PATH, "hashIpfs": cid }, "meta": {} }).to_string();

    let (s, report) = raw("POST", &url, Some(&body));
    assert_eq!(s, 200);
    assert_eq!(serde_json::from_str::<Value>(&report).unwrap()["verdict"], "VERIFIED");

    f.api.controller().update_quantum(TID, "0x00", 200).unwrap();
    let (s, report) = raw("POST", &url, Some(&body));
    assert_eq!(s, 200);
    assert_eq!(serde_json::from_str::<Value>(&report).unwrap()["verdict"], "CORRUPTED");

    assert_eq!(raw("POST", &url, Some("{oops")).0, 400);
    assert_eq!(raw("POST", &url, Some(&json!({ "id": "3", "data": { "api_path": PATH } }).to_string())).0, 400);
    let bad_cid = json!({ "id": "4", "data": { "api_path": PATH, "hashIpfs": "Qm123" } }).to_string();
    assert_eq!(raw("POST", &url, Some(&bad_cid)).0, 400);

    f.controller.shutdown();
    let (s, report) = raw("POST", &url, Some(&body));
    assert_eq!(s, 200);
    let report: Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["verdict"], "UNAVAILABLE");
    assert_eq!(report["actual_cid"], "");

    let lines = f.log.lines();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], format!("SUCCESS: Rota: {PATH} verificada!"));
    assert_eq!(lines[1], format!("ERROR: Rota: {PATH} corrompida!"));
    let (_, audits) = raw("GET", &format!("{}/audits", f.adapters.url()), None);
    assert_eq!(serde_json::from_str::<Vec<Value>>(&audits).unwrap().len(), 3);
}

#[test]
fn pin_endpoint_errors() {
    let f = adapter_fixture();
    let url = format!("{}/pin", f.adapters.url());
    let unknown = json!({ "id": "1", "data": { "api_path": format!("/api/v1/tenants/{TID}/slices/0x42") } });
    assert_eq!(raw("POST", &url, Some(&unknown.to_string())).0, 502);
    assert_eq!(raw("POST", &url, Some(r#"{"id":"1","data":{"api_path":"/etc/passwd"}}"#)).0, 400);
    let good = json!({ "id": "1", "data": { "api_path": PATH } }).to_string();
    let a = raw("POST", &url, Some(&good));
    let b = raw("POST", &url, Some(&good));
    assert_eq!(a, b);
    assert_eq!(a.0, 200);
}

#[test]
fn node_status_endpoint() {
    let stack = LocalStack::new(LedgerConfig::default());
    let dep_path = slicing::SlicePath::new(TID, "0x00");
    stack.controller().create_tenant_with_id(TID, "t").unwrap();
    stack.controller().create_slice(TID, "0x00", 100, vec![]).unwrap();
    let dep = slice_integrity::harness::deploy(&stack.ledger, stack.treasury(), &dep_path, 1, 5).unwrap();
    let node = Arc::new(Mutex::new(stack.node(dep.node_settings(), Arc::new(MemoryCursor::new()))));
    let server = ServerHandle::spawn_local(node::router(node.clone())).unwrap();
    let client = HttpClient::new(server.url());

    let spec = serde_json::to_value(snapshot_job()).unwrap();
    let created: Value = client.post_json("/jobs", &spec).unwrap();
    assert_eq!(created["job_id"], "my-bridge-task");
    assert_eq!(raw("POST", &format!("{}/jobs", server.url()), Some(&spec.to_string())).0, 409);
    assert_eq!(raw("POST", &format!("{}/jobs", server.url()), Some("[]")).0, 400);

    stack.ledger.execute(dep.admin, dep.validator, "request_snapshot", json!({})).unwrap();
    node.lock().unwrap().poll_and_dispatch().unwrap();
    let runs: Vec<Value> = client.get_json("/runs").unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0]["status"], "success");
    let jobs: Vec<Value> = client.get_json("/jobs").unwrap();
    assert_eq!(jobs.len(), 1);
}
