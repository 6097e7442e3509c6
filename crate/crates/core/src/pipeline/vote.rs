use crate::error::{Error, Result};

/// Per-instance plurality class; ties go to the lowest class index.
pub fn majority_vote(voters: &[&[usize]], n_classes: usize) -> Result<Vec<usize>> {
    let first = voters
        .first()
        .ok_or_else(|| Error::Pipeline("majority vote needs at least one voter".into()))?;
    let n = first.len();
    if voters.iter().any(|v| v.len() != n) {
        return Err(Error::Pipeline("voters disagree on instance count".into()));
    }
    let mut counts = vec![0usize; n_classes];
    (0..n)
        .map(|i| {
            counts.iter_mut().for_each(|c| *c = 0);
            for v in voters {
                let c = v[i];
                if c >= n_classes {
                    return Err(Error::Pipeline(format!("class {c} out of range")));
                }
                counts[c] += 1;
            }
            let mut best = 0;
            for (k, &c) in counts.iter().enumerate() {
                if c > counts[best] {
                    best = k;
                }
            }
            Ok(best)
        })
        .collect()
}

pub fn vote_accuracy(voters: &[&[usize]], truth: &[usize], n_classes: usize) -> Result<f64> {
    let pred = majority_vote(voters, n_classes)?;
    Ok(crate::zoo::accuracy(&pred, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plurality_and_tie_rule() {
        let (a, b, c) = (vec![0, 2], vec![0, 1], vec![1, 1]);
        assert_eq!(majority_vote(&[&a, &b, &c], 3).unwrap(), vec![0, 1]);
        assert_eq!(
            majority_vote(&[&[1usize][..], &[0usize][..]], 2).unwrap(),
            vec![0]
        );
        assert!(majority_vote(&[], 2).is_err());
    }

    #[test]
    fn single_voter_reproduces_its_accuracy() {
        let p = vec![0, 1, 1, 2];
        let truth = vec![0, 1, 2, 2];
        assert_eq!(vote_accuracy(&[&p], &truth, 3).unwrap(), 0.75);
    }
}
