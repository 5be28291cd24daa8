//! Value parsers for compound flags.

fn floats(s: &str, min: usize, max: usize, what: &str) -> Result<Vec<f64>, String> {
    let xs: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("invalid number '{t}' in {what}")))
        .collect::<Result<_, _>>()?;
    if xs.len() < min || xs.len() > max {
        return Err(format!("{what} expects {min}..={max} comma-separated values, got {}", xs.len()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(format!("non-finite value in {what}"));
    }
    Ok(xs)
}

/// `WxH` or `W,H`, e.g. `64x64`.
pub fn size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X', ','])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got '{s}'"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid size '{s}'"));
    Ok((p(w)?, p(h)?))
}

/// `azimuth,elevation,distance[,fov]` in degrees and model units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CamSpec {
    pub azimuth: f64,
    pub elevation: f64,
    pub distance: f64,
    pub fov: Option<f64>,
}

pub fn cam(s: &str) -> Result<CamSpec, String> {
    let v = floats(s, 3, 4, "--cam")?;
    Ok(CamSpec {
        azimuth: v[0],
        elevation: v[1],
        distance: v[2],
        fov: v.get(3).copied(),
    })
}

/// `sun_altitude,fog_density[,r,g,b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherSpec {
    pub sun_altitude: f64,
    pub fog_density: f64,
    pub fog_color: Option<[f64; 3]>,
}

pub fn weather(s: &str) -> Result<WeatherSpec, String> {
    let v = floats(s, 2, 5, "--weather")?;
    let fog_color = match v.len() {
        2 => None,
        5 => Some([v[2], v[3], v[4]]),
        _ => return Err("--weather expects sun,fog or sun,fog,r,g,b".into()),
    };
    Ok(WeatherSpec {
        sun_altitude: v[0],
        fog_density: v[1],
        fog_color,
    })
}

/// `dx,dy`.
pub fn pair(s: &str) -> Result<[f64; 2], String> {
    let v = floats(s, 2, 2, "pair")?;
    Ok([v[0], v[1]])
}

/// `r,g,b`.
pub fn rgb(s: &str) -> Result<[f64; 3], String> {
    let v = floats(s, 3, 3, "color")?;
    Ok([v[0], v[1], v[2]])
}

/// `azimuth,elevation,distance` half-widths.
pub fn triple(s: &str) -> Result<[f64; 3], String> {
    let v = floats(s, 3, 3, "triple")?;
    Ok([v[0], v[1], v[2]])
}
