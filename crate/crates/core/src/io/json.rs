//! JSON encoding of tree vectors.
//!
//! * a number is a scalar leaf;
//! * a rectangular, arbitrarily nested array of numbers is one leaf whose
//!   shape is the nesting (`[[1,2],[3,4]]` has shape `[2, 2]`);
//! * any other array is a list node;
//! * an object is a dict node, keys kept in file order.

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::structure::{Node, TreeStructure, TreeVector};

/// Shape and row-major values if `value` is a rectangular numeric array.
fn as_array(value: &Value) -> Option<(Vec<usize>, Vec<f64>)> {
    match value {
        Value::Number(n) => Some((Vec::new(), vec![n.as_f64()?])),
        Value::Array(items) => {
            let mut parts = items.iter().map(as_array);
            let Some(first) = parts.next() else {
                return Some((vec![0], Vec::new()));
            };
            let (inner, mut data) = first?;
            for part in parts {
                let (shape, values) = part?;
                if shape != inner {
                    return None;
                }
                data.extend(values);
            }
            let mut shape = vec![items.len()];
            shape.extend(inner);
            Some((shape, data))
        }
        _ => None,
    }
}

fn parse(value: &Value, path: &str, data: &mut Vec<f64>) -> Result<Node> {
    if let Some((shape, values)) = as_array(value) {
        data.extend(values);
        return Ok(Node::Leaf(shape));
    }
    match value {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, item)| parse(item, &format!("{path}[{i}]"), data))
            .collect::<Result<_>>()
            .map(Node::List),
        Value::Object(map) => map
            .iter()
            .map(|(k, item)| Ok((k.clone(), parse(item, &format!("{path}.{k}"), data)?)))
            .collect::<Result<_>>()
            .map(Node::Dict),
        other => Err(Error::Format(format!(
            "expected a number, array or object at `{path}`, found {other}"
        ))),
    }
}

/// Reads a tree vector, inferring its structure from the JSON shape.
pub fn tree_from_json(value: &Value) -> Result<TreeVector> {
    let mut data = Vec::new();
    let root = parse(value, "$", &mut data)?;
    TreeVector::unflatten(&TreeStructure::new(root), data)
}

fn number(x: f64) -> Value {
    // Non-finite values have no JSON representation and become null.
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn encode_leaf(shape: &[usize], data: &[f64]) -> Value {
    match shape.split_first() {
        None => number(data[0]),
        Some((&n, rest)) => {
            let step: usize = rest.iter().product();
            Value::Array(
                (0..n)
                    .map(|i| encode_leaf(rest, &data[i * step..(i + 1) * step]))
                    .collect(),
            )
        }
    }
}

fn encode(node: &Node, data: &[f64], offset: &mut usize) -> Value {
    match node {
        Node::Leaf(shape) => {
            let len: usize = shape.iter().product();
            let value = encode_leaf(shape, &data[*offset..*offset + len]);
            *offset += len;
            value
        }
        Node::List(children) => Value::Array(
            children
                .iter()
                .map(|c| encode(c, data, offset))
                .collect(),
        ),
        Node::Dict(entries) => {
            let mut map = Map::new();
            for (k, c) in entries {
                map.insert(k.clone(), encode(c, data, offset));
            }
            Value::Object(map)
        }
    }
}

/// Writes a tree vector in the layout [`tree_from_json`] reads.
pub fn tree_to_json(vec: &TreeVector) -> Value {
    encode(vec.structure().root(), vec.as_slice(), &mut 0)
}

/// Reads a dense matrix from a list of equal-length rows.
pub fn matrix_from_json(value: &Value) -> Result<Matrix> {
    match as_array(value) {
        Some((shape, data)) if shape.len() == 2 => {
            Ok(Matrix::from_row_major(shape[0], shape[1], data))
        }
        _ => Err(Error::Format(
            "a dense matrix must be a non-ragged array of numeric rows".into(),
        )),
    }
}
