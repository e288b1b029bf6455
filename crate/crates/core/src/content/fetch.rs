//! Live page fetching. Redirects are followed by hand so every hop is
//! recorded, and the certificate of an https landing page is inspected
//! with a separate handshake.

use std::io::Read;
use std::net::{TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, NaiveDate, Utc};
use rustls::client::danger::{HandshakeSignatureValid, ServerCertVerified, ServerCertVerifier};
use rustls::pki_types::{CertificateDer, ServerName, UnixTime};
use rustls::{
    ClientConfig, ClientConnection, DigitallySignedStruct, RootCertStore, SignatureScheme,
};
use tracing::debug;

use super::snapshot::{FetchError, PageSnapshot, TlsFacts};
use crate::url::parse_url;

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub timeout: Duration,
    pub max_redirects: usize,
    pub user_agent: String,
    pub max_body_bytes: u64,
    /// PEM bundle used instead of the bundled web PKI roots.
    pub root_store: Option<PathBuf>,
}

impl Default for FetchConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(10),
            max_redirects: 10,
            user_agent: concat!("phishlens/", env!("CARGO_PKG_VERSION")).to_string(),
            max_body_bytes: 2 * 1024 * 1024,
            root_store: None,
        }
    }
}

/// Fetch `url` and record what came back. Never fails: problems land in
/// `fetch_error`.
pub fn fetch_page(url: &str, cfg: &FetchConfig) -> PageSnapshot {
    let started = Utc::now();
    let deadline = Instant::now() + cfg.timeout;
    let failed = |e| PageSnapshot::failed(url, e, started);

    let Ok(first) = parse_url(url) else {
        return failed(FetchError::DnsFailure);
    };
    // Fetch what was parsed, with the assumed scheme made explicit.
    let mut current = if first.authority_offset.is_some() {
        url.trim().to_string()
    } else {
        format!("http://{}", url.trim())
    };

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(cfg.timeout))
        .max_redirects(0)
        .http_status_as_error(false)
        .user_agent(cfg.user_agent.as_str())
        // Trust is judged by the certificate probe, not by whether the body loads.
        .tls_config(
            ureq::tls::TlsConfig::builder()
                .disable_verification(true)
                .build(),
        )
        .build()
        .into();

    let mut chain = Vec::new();
    loop {
        if let Err(e) = resolve(&current) {
            return with_chain(failed(e), chain);
        }
        let remaining = deadline.saturating_duration_since(Instant::now());
        if remaining.is_zero() {
            return with_chain(failed(FetchError::Timeout), chain);
        }
        let mut resp = match agent.get(&current).call() {
            Ok(r) => r,
            Err(e) => return with_chain(failed(classify(&e)), chain),
        };
        let status = resp.status().as_u16();
        if (300..400).contains(&status) {
            if let Some(loc) = resp.headers().get("location").and_then(|v| v.to_str().ok()) {
                let next = match url::Url::parse(&current).and_then(|base| base.join(loc)) {
                    Ok(u) => u.to_string(),
                    Err(_) => loc.to_string(),
                };
                chain.push(if chain.is_empty() {
                    url.to_string()
                } else {
                    current.clone()
                });
                if chain.len() > cfg.max_redirects {
                    let mut s = failed(FetchError::TooManyRedirects);
                    s.redirect_chain = chain;
                    s.final_url = next;
                    s.status = Some(status);
                    return s;
                }
                current = next;
                continue;
            }
        }

        let mime = resp.body().mime_type().map(str::to_ascii_lowercase);
        let html = mime
            .as_deref()
            .is_none_or(|m| m.contains("html") || m.starts_with("text/"));
        let mut snap = PageSnapshot {
            requested_url: url.to_string(),
            redirect_chain: chain,
            final_url: current.clone(),
            status: Some(status),
            body: None,
            fetched_at: started,
            tls: None,
            fetch_error: None,
        };
        if !html {
            snap.fetch_error = Some(FetchError::NonHtml);
            return snap;
        }
        let mut bytes = Vec::new();
        let read = resp
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .reader()
            .take(cfg.max_body_bytes)
            .read_to_end(&mut bytes);
        if let Err(e) = read {
            debug!(url, error = %e, "body read failed");
            snap.fetch_error = Some(if e.kind() == std::io::ErrorKind::TimedOut {
                FetchError::Timeout
            } else {
                FetchError::ConnectionRefused
            });
            return snap;
        }
        snap.body = Some(String::from_utf8_lossy(&bytes).into_owned());
        if current.to_ascii_lowercase().starts_with("https://") {
            snap.tls = probe_tls(&current, cfg, started.date_naive());
        }
        return snap;
    }
}

fn with_chain(mut s: PageSnapshot, chain: Vec<String>) -> PageSnapshot {
    s.redirect_chain = chain;
    s
}

fn host_port(url: &str) -> Option<(String, u16)> {
    let u = url::Url::parse(url).ok()?;
    let host = u.host_str()?.trim_matches(['[', ']']).to_string();
    Some((host, u.port_or_known_default()?))
}

fn resolve(url: &str) -> Result<(), FetchError> {
    let (host, port) = host_port(url).ok_or(FetchError::DnsFailure)?;
    match (host.as_str(), port).to_socket_addrs() {
        Ok(addrs) if addrs.len() > 0 => Ok(()),
        _ => Err(FetchError::DnsFailure),
    }
}

fn classify(e: &ureq::Error) -> FetchError {
    match e {
        ureq::Error::Timeout(_) => FetchError::Timeout,
        ureq::Error::HostNotFound => FetchError::DnsFailure,
        ureq::Error::TooManyRedirects => FetchError::TooManyRedirects,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => FetchError::Timeout,
        _ => FetchError::ConnectionRefused,
    }
}

fn root_store(cfg: &FetchConfig) -> RootCertStore {
    let mut roots = RootCertStore::empty();
    match &cfg.root_store {
        Some(path) => {
            use rustls::pki_types::pem::PemObject;
            if let Ok(iter) = CertificateDer::pem_file_iter(path) {
                for cert in iter.flatten() {
                    let _ = roots.add(cert);
                }
            }
        }
        None => roots.extend(webpki_roots::TLS_SERVER_ROOTS.iter().cloned()),
    }
    roots
}

/// Handshake with the server twice if needed: once verifying against the
/// root store, and once more without verification to read an untrusted chain.
fn probe_tls(url: &str, cfg: &FetchConfig, today: NaiveDate) -> Option<TlsFacts> {
    let (host, port) = host_port(url)?;
    let provider = Arc::new(rustls::crypto::ring::default_provider());
    let verifying = ClientConfig::builder_with_provider(provider.clone())
        .with_safe_default_protocol_versions()
        .ok()?
        .with_root_certificates(root_store(cfg))
        .with_no_client_auth();
    match handshake(&host, port, verifying, cfg.timeout) {
        Ok(certs) => leaf_facts(certs.first()?, true, today),
        Err(HandshakeFailure::Certificate) => {
            let permissive = ClientConfig::builder_with_provider(provider.clone())
                .with_safe_default_protocol_versions()
                .ok()?
                .dangerous()
                .with_custom_certificate_verifier(Arc::new(AcceptAny(provider)))
                .with_no_client_auth();
            let certs = handshake(&host, port, permissive, cfg.timeout).ok()?;
            leaf_facts(certs.first()?, false, today)
        }
        Err(HandshakeFailure::Other) => None,
    }
}

enum HandshakeFailure {
    Certificate,
    Other,
}

fn handshake(
    host: &str,
    port: u16,
    config: ClientConfig,
    timeout: Duration,
) -> Result<Vec<CertificateDer<'static>>, HandshakeFailure> {
    let name = ServerName::try_from(host.to_string()).map_err(|_| HandshakeFailure::Other)?;
    let addr = (host, port)
        .to_socket_addrs()
        .ok()
        .and_then(|mut a| a.next())
        .ok_or(HandshakeFailure::Other)?;
    let mut sock =
        TcpStream::connect_timeout(&addr, timeout).map_err(|_| HandshakeFailure::Other)?;
    let _ = sock.set_read_timeout(Some(timeout));
    let _ = sock.set_write_timeout(Some(timeout));
    let mut conn =
        ClientConnection::new(Arc::new(config), name).map_err(|_| HandshakeFailure::Other)?;
    while conn.is_handshaking() {
        if let Err(e) = conn.complete_io(&mut sock) {
            let cert_error = e
                .get_ref()
                .and_then(|inner| inner.downcast_ref::<rustls::Error>())
                .is_some_and(|re| {
                    matches!(
                        re,
                        rustls::Error::InvalidCertificate(_)
                            | rustls::Error::NoCertificatesPresented
                    )
                });
            return Err(if cert_error {
                HandshakeFailure::Certificate
            } else {
                HandshakeFailure::Other
            });
        }
    }
    Ok(conn
        .peer_certificates()
        .map(|c| c.iter().map(|d| d.clone().into_owned()).collect())
        .unwrap_or_default())
}

fn leaf_facts(der: &CertificateDer<'_>, trusted: bool, today: NaiveDate) -> Option<TlsFacts> {
    let (_, cert) = x509_parser::parse_x509_certificate(der.as_ref()).ok()?;
    let issuer = cert
        .issuer()
        .iter_organization()
        .next()
        .and_then(|o| o.as_str().ok())
        .map(str::to_string)
        .unwrap_or_else(|| cert.issuer().to_string());
    let to_date = |t: x509_parser::time::ASN1Time| {
        DateTime::from_timestamp(t.timestamp(), 0).map(|d| d.date_naive())
    };
    let not_before = to_date(cert.validity().not_before)?;
    let not_after = to_date(cert.validity().not_after)?;
    Some(TlsFacts::new(issuer, trusted, not_before, not_after, today))
}

#[derive(Debug)]
struct AcceptAny(Arc<rustls::crypto::CryptoProvider>);

impl ServerCertVerifier for AcceptAny {
    fn verify_server_cert(
        &self,
        _end_entity: &CertificateDer<'_>,
        _intermediates: &[CertificateDer<'_>],
        _server_name: &ServerName<'_>,
        _ocsp_response: &[u8],
        _now: UnixTime,
    ) -> Result<ServerCertVerified, rustls::Error> {
        Ok(ServerCertVerified::assertion())
    }

    fn verify_tls12_signature(
        &self,
        _message: &[u8],
        _cert: &CertificateDer<'_>,
        _dss: &DigitallySignedStruct,
    ) -> Result<HandshakeSignatureValid, rustls::Error> {
        Ok(HandshakeSignatureValid::assertion())
    }

    fn verify_tls13_signature(
        &self,
        _message: &[u8],
        _cert: &CertificateDer<'_>,
        _dss: &DigitallySignedStruct,
    ) -> Result<HandshakeSignatureValid, rustls::Error> {
        Ok(HandshakeSignatureValid::assertion())
    }

    fn supported_verify_schemes(&self) -> Vec<SignatureScheme> {
        self.0.signature_verification_algorithms.supported_schemes()
    }
}
