use serde::{Deserialize, Serialize};

use super::StageKind;

/// What a flow endpoint is, for adjacency purposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointKind {
    Stage(StageKind),
    Store,
}

impl EndpointKind {
    pub const ALL: [EndpointKind; 6] = [
        EndpointKind::Stage(StageKind::Create),
        EndpointKind::Stage(StageKind::Process),
        EndpointKind::Stage(StageKind::Release),
        EndpointKind::Stage(StageKind::Transfer),
        EndpointKind::Stage(StageKind::Receive),
        EndpointKind::Store,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EndpointKind::Stage(k) => k.keyword(),
            EndpointKind::Store => "store",
        }
    }
}

/// Whether a flow from `from` to `to` is admitted by the stage topology.
///
/// `Transfer -> Transfer` is admitted here; it is only legal across a machine
/// boundary, which callers check separately.
pub fn is_legal_flow(from: EndpointKind, to: EndpointKind) -> bool {
    use EndpointKind::{Stage as S, Store};
    use StageKind::*;
    matches!(
        (from, to),
        (S(Transfer), S(Receive))
            | (S(Receive), S(Process))
            | (S(Receive), S(Release))
            | (S(Process), S(Release))
            | (S(Process), S(Create))
            | (S(Create), S(Process))
            | (S(Create), S(Release))
            | (S(Release), S(Transfer))
            | (S(Transfer), S(Transfer))
            | (S(_), Store)
            | (Store, S(Process))
            | (Store, S(Release))
    )
}

/// Every legal (from, to) kind pair.
pub fn legal_pairs() -> Vec<(EndpointKind, EndpointKind)> {
    let mut out = Vec::new();
    for from in EndpointKind::ALL {
        for to in EndpointKind::ALL {
            if is_legal_flow(from, to) {
                out.push((from, to));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_expected_size() {
        // nine stage-to-stage pairs, five stage-to-store, two store-to-stage
        assert_eq!(legal_pairs().len(), 9 + 5 + 2);
    }

    #[test]
    fn receive_cannot_skip_to_transfer() {
        assert!(!is_legal_flow(
            EndpointKind::Stage(StageKind::Receive),
            EndpointKind::Stage(StageKind::Transfer)
        ));
        assert!(!is_legal_flow(EndpointKind::Store, EndpointKind::Store));
        assert!(!is_legal_flow(
            EndpointKind::Stage(StageKind::Process),
            EndpointKind::Stage(StageKind::Process)
        ));
    }
}
