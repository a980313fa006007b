//! The ten daily living-need categories and the two ways of meeting them.

use serde::{Deserialize, Serialize};

/// The ten categories of daily living needs a life-service platform can
/// fulfill. Integer codes 0–9 are fixed by this ordering and used everywhere
/// scores, rankings, or distributions are indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NeedCategory {
    OrderingFoodDelivery,
    EatingInRestaurant,
    BookingHotel,
    BuyingMedicine,
    SpecialtyShoppingOnline,
    HairDressing,
    GroceryShoppingOnline,
    Beauty,
    Tourism,
    Entertainment,
}

/// Number of need categories.
pub const NEED_COUNT: usize = 10;

impl NeedCategory {
    /// All ten categories in code order.
    pub const ALL: [NeedCategory; NEED_COUNT] = [
        NeedCategory::OrderingFoodDelivery,
        NeedCategory::EatingInRestaurant,
        NeedCategory::BookingHotel,
        NeedCategory::BuyingMedicine,
        NeedCategory::SpecialtyShoppingOnline,
        NeedCategory::HairDressing,
        NeedCategory::GroceryShoppingOnline,
        NeedCategory::Beauty,
        NeedCategory::Tourism,
        NeedCategory::Entertainment,
    ];

    /// Stable integer code, 0–9.
    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<NeedCategory> {
        Self::ALL.get(code).copied()
    }

    /// The way this need is met: four categories are fulfilled via delivery,
    /// the other six in store.
    pub fn way(self) -> NeedsMeetingWay {
        match self {
            NeedCategory::SpecialtyShoppingOnline
            | NeedCategory::GroceryShoppingOnline
            | NeedCategory::OrderingFoodDelivery
            | NeedCategory::BuyingMedicine => NeedsMeetingWay::ViaDelivery,
            NeedCategory::EatingInRestaurant
            | NeedCategory::BookingHotel
            | NeedCategory::HairDressing
            | NeedCategory::Beauty
            | NeedCategory::Tourism
            | NeedCategory::Entertainment => NeedsMeetingWay::InStore,
        }
    }
}

/// Whether a need is satisfied by receiving a delivery or by visiting a
/// physical store. Code 0 is via-delivery, code 1 is in-store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeedsMeetingWay {
    ViaDelivery,
    InStore,
}

/// Number of needs-meeting ways.
pub const WAY_COUNT: usize = 2;

impl NeedsMeetingWay {
    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<NeedsMeetingWay> {
        match code {
            0 => Some(NeedsMeetingWay::ViaDelivery),
            1 => Some(NeedsMeetingWay::InStore),
            _ => None,
        }
    }
}
