//! PEM / X.509 material summaries.

use serde::Serialize;
use x509_parser::pem::Pem;

use super::CredentialError;

const CERTIFICATE_LABEL: &str = "CERTIFICATE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateInfo {
    pub subject: String,
    pub issuer: String,
    pub serial: String,
    pub not_before: i64,
    pub not_after: i64,
}

/// Summary of a PEM bundle: the label of every block in order, and the
/// parsed certificates among them. Key blocks are listed but not parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct X509Summary {
    pub block_labels: Vec<String>,
    pub certificates: Vec<CertificateInfo>,
}

impl X509Summary {
    /// The first certificate in the bundle, conventionally the leaf.
    pub fn leaf(&self) -> Option<&CertificateInfo> {
        self.certificates.first()
    }

    pub fn has_private_key(&self) -> bool {
        self.block_labels.iter().any(|l| l.ends_with("PRIVATE KEY"))
    }
}

pub fn decode_pem(raw: &[u8]) -> Result<X509Summary, CredentialError> {
    let mut block_labels = Vec::new();
    let mut certificates = Vec::new();

    for pem in Pem::iter_from_buffer(raw) {
        let pem = pem.map_err(|e| CredentialError::MalformedPem(e.to_string()))?;
        if pem.label == CERTIFICATE_LABEL {
            let cert = pem
                .parse_x509()
                .map_err(|e| CredentialError::MalformedPem(format!("certificate: {e}")))?;
            let validity = cert.validity();
            certificates.push(CertificateInfo {
                subject: cert.subject().to_string(),
                issuer: cert.issuer().to_string(),
                serial: cert.raw_serial_as_string(),
                not_before: validity.not_before.timestamp(),
                not_after: validity.not_after.timestamp(),
            });
        }
        block_labels.push(pem.label);
    }

    if block_labels.is_empty() {
        return Err(CredentialError::MalformedPem("no PEM blocks found".into()));
    }
    Ok(X509Summary { block_labels, certificates })
}

pub(crate) fn has_pem_armor(contents: &[u8]) -> bool {
    contents.windows(11).any(|w| w == b"-----BEGIN ")
}
